//! Perturbation harness: scramble every bar and news item dated after a cursor and check
//! that nothing computed at the cursor changes.

use chrono::NaiveDate;
use fundsim_core::indicators::{compute_raw, list_catalog, reads_future, Ohlcv};
use fundsim_core::marketdata::{Dataset, PriceField};
use fundsim_core::strategy::{target_weights, StrategyPool};
use rand::Rng;

/// Copy of `ds` with every post-cursor bar rescaled by a random factor in [0.5, 1.5] (OHLC
/// together, volume separately) and every post-cursor headline replaced.
pub fn perturb_after(ds: &Dataset, cursor: NaiveDate, seed: u64) -> Dataset {
    let mut rng = super::gen::rng(seed);
    let scrambled = ds.map_bars(|b| {
        if b.date > cursor {
            let f: f64 = rng.random_range(0.5..1.5);
            b.open *= f;
            b.high *= f;
            b.low *= f;
            b.close *= f;
            b.volume = (b.volume as f64 * rng.random_range(0.2..5.0)) as u64 + 1;
        }
    });
    scrambled.map_news(|n| {
        if n.date() > cursor {
            n.headline = format!("Scrambled {} crashes, profit warning, downgrade", n.headline.len());
            n.body.clear();
        }
    })
}

/// Compares every pool strategy's target weights and every catalog indicator (at default
/// parameters, on the first `n_symbols` symbols) at or before `cursor`.
pub fn compare_at(a: &Dataset, b: &Dataset, pool: &StrategyPool, cursor: NaiveDate, n_symbols: usize) -> Vec<String> {
    let mut out = Vec::new();
    let (va, vb) = (a.view_at(cursor).unwrap(), b.view_at(cursor).unwrap());
    for s in &pool.strategies {
        let wa = target_weights(s, &va).unwrap();
        let wb = target_weights(s, &vb).unwrap();
        if wa != wb {
            out.push(format!("{cursor} {}: weights differ", s.id));
        }
    }
    if va.max_date_returned().is_some_and(|d| d > cursor) {
        out.push(format!("{cursor}: view handed out data after the cursor"));
    }
    let idx = a.calendar().index_of(cursor).unwrap();
    for sym in a.symbols().iter().take(n_symbols) {
        let full_a = Ohlcv::from_bars(&a.all_bars().filter(|x| &x.symbol == sym).cloned().collect::<Vec<_>>(), PriceField::Close);
        let full_b = Ohlcv::from_bars(&b.all_bars().filter(|x| &x.symbol == sym).cloned().collect::<Vec<_>>(), PriceField::Close);
        for entry in list_catalog() {
            let spec = entry.template();
            if reads_future(&spec) {
                continue;
            }
            let ra = compute_raw(&spec, &full_a).unwrap();
            let rb = compute_raw(&spec, &full_b).unwrap();
            for (la, lb) in ra.iter().zip(&rb) {
                for t in 0..=idx {
                    if la[t].to_bits() != lb[t].to_bits() && !(la[t].is_nan() && lb[t].is_nan()) {
                        out.push(format!("{cursor} {sym} {}: index {t} changed", spec.canonical()));
                        break;
                    }
                }
            }
        }
    }
    out
}
