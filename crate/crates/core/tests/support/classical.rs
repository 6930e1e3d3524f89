//! Constructed-market checks for the classical strategies, plus a grid-search oracle for
//! two-asset mean–variance.

use chrono::NaiveDate;
use fundsim_core::strategy::{mean_variance_weights, target_weights, Strategy, StrategyKind};
use fundsim_core::synth::from_closes;

pub fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 1, 4).unwrap()
}

/// Dense grid maximizer of `w·μ1 + (1−w)·μ2 − (γ/2)·Var` over w ∈ [0, 1].
pub fn mv_grid_two(mu: [f64; 2], cov: [[f64; 2]; 2], gamma: f64, steps: usize) -> f64 {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..=steps {
        let w = i as f64 / steps as f64;
        let v = 1.0 - w;
        let var = w * w * cov[0][0] + 2.0 * w * v * cov[0][1] + v * v * cov[1][1];
        let f = w * mu[0] + v * mu[1] - 0.5 * gamma * var;
        if f > best.0 {
            best = (f, w);
        }
    }
    best.1
}

/// TSM on one rising and one falling asset must hold only the riser, fully.
pub fn tsm_holds_trending_asset() -> Result<(), String> {
    let up: Vec<f64> = (0..80).map(|i| 100.0 * 1.004f64.powi(i)).collect();
    let down: Vec<f64> = (0..80).map(|i| 100.0 * 0.996f64.powi(i)).collect();
    let flat_noise: Vec<f64> = (0..80).map(|i| 100.0 + if i % 2 == 0 { 0.5 } else { -0.5 }).collect();
    let ds = from_closes(&[("UP", up), ("DOWN", down), ("CHOP", flat_noise)], start()).map_err(|e| e.to_string())?;
    let s = Strategy::new(StrategyKind::TimeSeriesMomentum { lookback: 20, top_k: 1 }).unwrap();
    for &day in &ds.calendar().days()[21..] {
        let w = target_weights(&s, &ds.view_at(day).unwrap()).map_err(|e| e.to_string())?;
        if w.weights.len() != 1 || w.weights.get("UP") != Some(&1.0) {
            return Err(format!("{day}: {:?}", w.weights));
        }
    }
    Ok(())
}

/// On a sine-wave (mean-reverting) path ZMR holds the asset exactly on the days its
/// z-score is at or below −threshold, and never otherwise.
pub fn zmr_enters_only_when_oversold() -> Result<usize, String> {
    let window = 20;
    let threshold = 1.0;
    let closes: Vec<f64> = (0..300)
        .map(|i| 100.0 + 8.0 * (i as f64 * 0.21).sin() + 0.7 * (i as f64 * 1.3).cos())
        .collect();
    let ds = from_closes(&[("MR", closes.clone())], start()).map_err(|e| e.to_string())?;
    let s = Strategy::new(StrategyKind::ZScoreMeanReversion {
        window,
        z_threshold: threshold,
        top_k: 1,
    })
    .unwrap();
    let mut entries = 0;
    for (t, &day) in ds.calendar().days().iter().enumerate() {
        let w = target_weights(&s, &ds.view_at(day).unwrap()).map_err(|e| e.to_string())?;
        let held = w.weights.contains_key("MR");
        let expected = if t + 1 < window {
            false
        } else {
            let win = &closes[t + 1 - window..=t];
            let m = win.iter().sum::<f64>() / window as f64;
            let sd = (win.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (window - 1) as f64).sqrt();
            (closes[t] - m) / sd <= -threshold
        };
        if held != expected {
            return Err(format!("{day}: held={held} expected={expected}"));
        }
        entries += held as usize;
    }
    if entries == 0 {
        return Err("path never became oversold".into());
    }
    Ok(entries)
}

/// MV on two assets with identical return statistics returns (0.5, 0.5), matching the
/// grid oracle to 1e-6. Returns the worst deviation.
pub fn mv_symmetric_matches_grid() -> Result<f64, String> {
    let mut worst = 0.0f64;
    let sym_cases = [
        ([0.001, 0.001], [[4e-4, 0.0], [0.0, 4e-4]], 1.0),
        ([0.0005, 0.0005], [[1e-4, 3e-5], [3e-5, 1e-4]], 1.0),
        ([0.002, 0.002], [[9e-4, -2e-4], [-2e-4, 9e-4]], 5.0),
    ];
    for (mu, cov, g) in sym_cases {
        let w = mean_variance_weights(&mu, &[cov[0].to_vec(), cov[1].to_vec()], g);
        let oracle = mv_grid_two(mu, cov, g, 1_000_000);
        worst = worst.max((w[0] - oracle).abs()).max((w[0] - 0.5).abs()).max((w[1] - 0.5).abs());
    }
    // through the strategy: B's returns are A's in reverse order
    let rets: Vec<f64> = (0..70).map(|i| 0.01 * ((i * 7919 % 13) as f64 - 6.0) / 6.0).collect();
    let path = |r: &[f64]| {
        let mut p = vec![100.0];
        for x in r {
            p.push(p.last().unwrap() * (1.0 + x));
        }
        p
    };
    let rev: Vec<f64> = rets.iter().rev().copied().collect();
    let ds = from_closes(&[("A", path(&rets)), ("B", path(&rev))], start()).map_err(|e| e.to_string())?;
    let s = Strategy::new(StrategyKind::MeanVariance {
        window: 70,
        risk_aversion: 1.0,
    })
    .unwrap();
    let last = *ds.calendar().days().last().unwrap();
    let w = target_weights(&s, &ds.view_at(last).unwrap()).map_err(|e| e.to_string())?;
    for k in ["A", "B"] {
        worst = worst.max((w.weights.get(k).copied().unwrap_or(0.0) - 0.5).abs());
    }
    if worst > 1e-6 {
        return Err(format!("worst deviation {worst:e}"));
    }
    Ok(worst)
}
