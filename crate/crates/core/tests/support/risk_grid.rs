//! Exhaustive trigger grid and an independent hysteresis model.

use fundsim_core::risk::{risk_score, should_trigger_ram, RamGate, RiskConfig};
use rand::Rng;

/// Every combination of components in {0, 1/9, …, 1}: 10⁴ cases. The oracle decides
/// `Σ wᵢxᵢ > 0.75` in integer arithmetic (weights in tenths, components in ninths).
pub fn trigger_grid_violations() -> (usize, usize) {
    let w_tenths = [3i64, 2, 2, 3];
    let weights = [0.3, 0.2, 0.2, 0.3];
    let mut cases = 0;
    let mut bad = 0;
    for a in 0..10i64 {
        for b in 0..10i64 {
            for c in 0..10i64 {
                for d in 0..10i64 {
                    cases += 1;
                    let k = [a, b, c, d];
                    let x = k.map(|v| v as f64 / 9.0);
                    let score = risk_score(&x, &weights).unwrap();
                    // Σ w·k/9 > 3/4  ⇔  4·Σ(10w)·k > 270
                    let expected = 4 * (0..4).map(|i| w_tenths[i] * k[i]).sum::<i64>() > 270;
                    if should_trigger_ram(score) != expected {
                        bad += 1;
                    }
                }
            }
        }
    }
    (cases, bad)
}

/// Replays random score paths through [`RamGate`] and a direct restatement of the rule:
/// fire when above the trigger and (never fired, or a sub-rearm score was seen since the
/// last fire, or the cooldown elapsed). Also checks no fire happens within the cooldown
/// without an intervening rearm.
pub fn hysteresis_violations(paths: usize, seed: u64) -> usize {
    let cfg = RiskConfig::default();
    let mut rng = super::gen::rng(seed);
    let mut bad = 0;
    for _ in 0..paths {
        let mut gate = RamGate::default();
        let mut last: Option<usize> = None;
        let mut low_since = false;
        for day in 0..60 {
            let score: f64 = match rng.random_range(0..4) {
                0 => rng.random_range(0.0..0.6),
                1 => rng.random_range(0.6..0.75),
                2 => 0.75,
                _ => rng.random_range(0.7500001..1.0),
            };
            if score < cfg.rearm_below {
                low_since = true;
            }
            let expected = score > cfg.trigger
                && match last {
                    None => true,
                    Some(l) => low_since || day - l >= cfg.cooldown_days,
                };
            let got = gate.check(score, day, &cfg);
            if got != expected {
                bad += 1;
            }
            if expected {
                last = Some(day);
                low_since = false;
            }
        }
    }
    bad
}
