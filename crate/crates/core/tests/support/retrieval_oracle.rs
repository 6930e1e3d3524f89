//! Exhaustive-scan reference for memory retrieval.

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use fundsim_core::agents::{embed, MemoryBank, MemoryRecord, StoreKind};
use rand::Rng;

use super::gen::rng;

const WORDS: [&str; 24] = [
    "rally", "slump", "earnings", "guidance", "energy", "banks", "rates", "inflation", "ALFA", "BRVO", "ECHO",
    "NOVA", "upgrade", "downgrade", "volatility", "sector", "momentum", "reversal", "hedge", "cash", "growth",
    "recession", "probe", "dividend",
];

fn sentence(r: &mut impl Rng) -> String {
    let n = r.random_range(2..10);
    (0..n).map(|_| WORDS[r.random_range(0..WORDS.len())]).collect::<Vec<_>>().join(" ")
}

/// A bank of `n` records over all three stores. About one text in ten repeats an earlier
/// one so that exact similarity ties occur.
pub fn random_bank(n: usize, seed: u64) -> MemoryBank {
    let mut r = rng(seed);
    let d0 = NaiveDate::from_ymd_opt(2022, 1, 3).unwrap();
    let cursor = d0 + Days::new(420);
    let mut bank = MemoryBank::new();
    let mut texts: Vec<String> = Vec::with_capacity(n);
    for _ in 0..n {
        let text = if !texts.is_empty() && r.random_bool(0.1) {
            texts[r.random_range(0..texts.len())].clone()
        } else {
            sentence(&mut r)
        };
        let store = StoreKind::ALL[r.random_range(0..3)];
        let ts = d0 + Days::new(r.random_range(0..60) * 7);
        bank.insert_embedded(store, ts, cursor, text.clone(), embed(&text), BTreeMap::new()).unwrap();
        texts.push(text);
    }
    bank
}

fn scan_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Full sort of every eligible record: similarity, then newer timestamp, then later id.
pub fn scan<'a>(bank: &'a MemoryBank, query: &[f64], stores: &[StoreKind], k: usize) -> Vec<(f64, &'a MemoryRecord)> {
    let mut all: Vec<(f64, &MemoryRecord)> = bank
        .records()
        .iter()
        .filter(|r| stores.contains(&r.store))
        .map(|r| (scan_cosine(query, &r.embedding), r))
        .collect();
    all.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(b.1.timestamp.cmp(&a.1.timestamp))
            .then(b.1.id.cmp(&a.1.id))
    });
    all.truncate(k);
    all
}

/// Runs `queries` random retrievals against a bank of `n` records and returns the number
/// of queries whose result differs from the scan. Position swaps between records whose
/// scan similarities agree within 1e-12 are rounding, not disagreement.
pub fn mismatches(n: usize, queries: usize, seed: u64) -> usize {
    let bank = random_bank(n, seed);
    let mut r = rng(seed ^ 0x5eed);
    let mut bad = 0;
    for q in 0..queries {
        let text = if q % 3 == 0 {
            bank.records()[r.random_range(0..n)].text.clone()
        } else {
            sentence(&mut r)
        };
        let stores: Vec<StoreKind> = StoreKind::ALL.iter().copied().filter(|_| r.random_bool(0.7)).collect();
        let k = [1, 3, 10, 25][q % 4];
        let e = embed(&text);
        let got = bank.retrieve(&e, &stores, k);
        let want = scan(&bank, &e, &stores, k);
        let same = got.len() == want.len()
            && got.iter().zip(&want).all(|(g, (s, w))| {
                g.id == w.id || (scan_cosine(&e, &g.embedding) - s).abs() <= 1e-12
            });
        if !same {
            bad += 1;
        }
    }
    bad
}
