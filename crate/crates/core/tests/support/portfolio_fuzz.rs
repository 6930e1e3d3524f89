//! Randomized action sequences against the account, checking every ledger invariant.

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use fundsim_core::portfolio::{Account, Action, ComplianceCaps, Fill, Quote, QuoteBook, Side};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const SYMBOLS: [&str; 5] = ["AAA", "BBB", "CCC", "DDD", "EEE"];

#[derive(Debug, Default)]
pub struct FuzzReport {
    pub sequences: usize,
    pub actions: usize,
    pub fills: usize,
    pub rejections: usize,
    pub violations: Vec<String>,
}

fn quotes(rng: &mut ChaCha8Rng, date: NaiveDate, missing: bool) -> QuoteBook {
    let mut book = QuoteBook::new(date);
    for (i, s) in SYMBOLS.iter().enumerate() {
        if missing && i == 4 {
            continue;
        }
        let close: f64 = rng.random_range(1.0..300.0);
        let open: f64 = close * rng.random_range(0.9..1.1);
        let high = close.max(open) * rng.random_range(1.0..1.08);
        let low = close.min(open) * rng.random_range(0.92..1.0);
        book = book
            .with(s, Quote { open, high, low, close })
            .with_sector(s, if i < 3 { "Tech" } else { "Energy" });
    }
    book
}

fn random_weights(rng: &mut ChaCha8Rng) -> BTreeMap<String, f64> {
    let mut w = BTreeMap::new();
    let mut left = 1.0;
    for s in SYMBOLS {
        if rng.random_bool(0.6) {
            let x = rng.random_range(0.0..left);
            w.insert(s.to_string(), x);
            left -= x;
        }
    }
    if rng.random_bool(0.03) {
        w.insert("AAA".into(), -0.1);
    }
    w
}

fn random_action(rng: &mut ChaCha8Rng, acct: &Account) -> Action {
    let sym = SYMBOLS[rng.random_range(0..SYMBOLS.len())].to_string();
    match rng.random_range(0..13) {
        0 => Action::Buy { symbol: sym, quantity: rng.random_range(1..5000) },
        1 => Action::Sell {
            symbol: sym.clone(),
            quantity: rng.random_range(1..=acct.quantity(&sym).max(1) + 2),
        },
        2 => Action::Hold,
        3 => Action::AdjustQuantityPrice {
            symbol: sym,
            target_quantity: rng.random_range(0..3000),
            limit: rng.random_bool(0.5).then(|| rng.random_range(1.0..300.0)),
        },
        4 => Action::SetStops {
            symbol: sym,
            stop_loss: rng.random_bool(0.7).then(|| rng.random_range(1.0..300.0)),
            take_profit: rng.random_bool(0.7).then(|| rng.random_range(1.0..300.0)),
        },
        5 => Action::AdjustRiskExposure { invested: rng.random_range(0.0..1.0) },
        6 => Action::ExecuteAllocation { weights: random_weights(rng) },
        7 => Action::EnforceCompliance {
            caps: ComplianceCaps {
                max_asset_weight: rng.random_range(0.05..1.0),
                max_sector_weight: rng.random_range(0.1..1.0),
            },
        },
        8 | 9 => Action::Rebalance { weights: random_weights(rng) },
        10 => Action::MarketScan,
        11 => Action::InitiateHedge { fraction: rng.random_range(0.0..1.0) },
        _ => Action::GenerateReport,
    }
}

fn conserved_cash(initial: f64, fills: &[Fill]) -> f64 {
    let (mut proceeds, mut costs, mut fees) = (0.0, 0.0, 0.0);
    for f in fills {
        match f.side {
            Side::Sell => proceeds += f.notional(),
            Side::Buy => costs += f.notional(),
        }
        fees += f.fee;
    }
    initial + proceeds - costs - fees
}

/// Runs `n` sequences of 1..=12 actions (with stop processing between days).
pub fn run(n: usize, seed: u64) -> FuzzReport {
    let mut rng = super::gen::rng(seed);
    let mut rep = FuzzReport::default();
    let d0 = NaiveDate::from_ymd_opt(2022, 1, 3).unwrap();
    for seq in 0..n {
        rep.sequences += 1;
        let initial = rng.random_range(100.0..2e6);
        let fee = [0.0, 0.001, 0.0025][rng.random_range(0..3)];
        let mut acct = Account::new(initial, fee);
        let steps = rng.random_range(1..=12);
        for step in 0..steps {
            let date = d0 + Days::new(step as u64);
            let missing = rng.random_bool(0.05);
            let book = quotes(&mut rng, date, missing);
            if rng.random_bool(0.3) {
                let n_before = acct.ledger.len();
                let fills = acct.process_stops(&book);
                rep.fills += fills.len();
                if acct.ledger.len() != n_before + fills.len() {
                    rep.violations.push(format!("seq {seq}: stop fills not appended"));
                }
            }
            let action = random_action(&mut rng, &acct);
            rep.actions += 1;
            let before = acct.clone();
            match acct.apply_action(&action, &book, "fuzz") {
                Ok(fills) => {
                    rep.fills += fills.len();
                    if acct.ledger[..before.ledger.len()] != before.ledger[..] {
                        rep.violations.push(format!("seq {seq}: ledger prefix rewritten"));
                    }
                    if matches!(action, Action::Hold | Action::MarketScan | Action::GenerateReport) && acct != before {
                        rep.violations.push(format!("seq {seq}: identity action changed account"));
                    }
                    for f in &fills {
                        if f.quantity == 0 || (f.fee - f.notional().abs() * fee).abs() > 1e-9 {
                            rep.violations.push(format!("seq {seq}: bad fill {f:?}"));
                        }
                    }
                }
                Err(_) => {
                    rep.rejections += 1;
                    if acct != before {
                        rep.violations.push(format!("seq {seq}: rejected {action:?} mutated account"));
                    }
                }
            }
            if !(acct.cash >= 0.0) {
                rep.violations.push(format!("seq {seq}: negative cash {}", acct.cash));
            }
            if acct.positions.values().any(|p| p.quantity == 0) {
                rep.violations.push(format!("seq {seq}: zero-quantity position kept"));
            }
        }
        let expect = conserved_cash(initial, &acct.ledger);
        if (expect - acct.cash).abs() > 1e-9 * initial.max(1.0) {
            rep.violations.push(format!("seq {seq}: conservation off by {}", expect - acct.cash));
        }
        match Account::replay(initial, fee, &acct.ledger) {
            Ok(r) if r.snapshot() == acct.snapshot() && r.ledger == acct.ledger => {}
            Ok(_) => rep.violations.push(format!("seq {seq}: replay differs")),
            Err(e) => rep.violations.push(format!("seq {seq}: replay failed: {e}")),
        }
    }
    rep
}
