//! Independent references for the adaptive reward weights and the discounted policy score.

use fundsim_core::agents::{adaptive_weights, score_policies, CandidateRewards};
use rand::Rng;

use super::gen::rng;

pub fn sigmoid(x: f64) -> f64 {
    x.exp() / (1.0 + x.exp())
}

fn random_history(r: &mut impl Rng) -> Vec<(f64, f64)> {
    let len = r.random_range(1..30);
    let mode = r.random_range(0..4);
    (0..len)
        .map(|_| match mode {
            0 => (r.random_range(-0.05..0.05), r.random_range(-0.05..0.05)),
            1 => (r.random_range(0.0..0.05), r.random_range(0.0..0.05)),
            2 => {
                // sums that nearly cancel, sending the raw ratio far out
                let x = r.random_range(-0.05..0.05);
                (x, -x + r.random_range(-1e-6..1e-6))
            }
            _ => (0.0, 0.0),
        })
        .collect()
}

pub struct WeightReport {
    pub cases: usize,
    pub violations: Vec<String>,
    /// Largest |w_sim − σ(0.5)| over the symmetric cases.
    pub symmetric_error: f64,
}

/// `cases` random histories: the weights must sum to exactly 1 and stay inside
/// (0.047, 0.953). Half as many symmetric histories (equal positive sums) must give σ(0.5).
pub fn weight_contract(cases: usize, seed: u64) -> WeightReport {
    let mut r = rng(seed);
    let mut violations = Vec::new();
    for i in 0..cases {
        let h = random_history(&mut r);
        let n = r.random_range(1..12);
        let (s, w) = adaptive_weights(&h, n).unwrap();
        if s + w != 1.0 || !(s > 0.047 && s < 0.953) {
            violations.push(format!("case {i}: w_sim={s} w_real={w}"));
        }
    }
    let mut symmetric_error: f64 = 0.0;
    for _ in 0..cases / 2 {
        let len = r.random_range(1..10);
        let sims: Vec<f64> = (0..len).map(|_| r.random_range(0.001..0.05)).collect();
        let mut reals = sims.clone();
        reals.reverse();
        let h: Vec<(f64, f64)> = sims.into_iter().zip(reals).collect();
        let (s, _) = adaptive_weights(&h, len).unwrap();
        symmetric_error = symmetric_error.max((s - sigmoid(0.5)).abs());
    }
    WeightReport {
        cases,
        violations,
        symmetric_error,
    }
}

/// Re-summation with explicit powers: period t of T gets γ^(T−t), and the realized series
/// is padded with zeros at the front to the simulated length.
pub fn oracle_score(c: &CandidateRewards, gamma: f64, w: (f64, f64)) -> f64 {
    let t_len = c.sim.len().max(c.real.len());
    let pad = |s: &[f64]| {
        let mut v = vec![0.0; t_len - s.len()];
        v.extend_from_slice(s);
        v
    };
    let (sim, real) = (pad(&c.sim), pad(&c.real));
    let mut total = 0.0;
    for t in 1..=t_len {
        total += gamma.powi((t_len - t) as i32) * (w.0 * sim[t - 1] + w.1 * real[t - 1]);
    }
    total
}

pub fn oracle_select(cands: &[CandidateRewards], gamma: f64, w: (f64, f64), incumbent: Option<&str>) -> String {
    let scores: Vec<f64> = cands.iter().map(|c| oracle_score(c, gamma, w)).collect();
    let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<&str> = cands
        .iter()
        .zip(&scores)
        .filter(|(_, s)| (best - **s).abs() <= 1e-12 * best.abs().max(s.abs()))
        .map(|(c, _)| c.id.as_str())
        .collect();
    match incumbent {
        Some(i) if tied.contains(&i) => i.to_string(),
        _ => tied.iter().min().unwrap().to_string(),
    }
}

fn random_candidates(r: &mut impl Rng) -> (Vec<CandidateRewards>, Option<String>) {
    let n = r.random_range(1..12);
    let len = r.random_range(1..20);
    let mut out: Vec<CandidateRewards> = Vec::with_capacity(n);
    for i in 0..n {
        let sim: Vec<f64> = if i > 0 && r.random_bool(0.15) {
            out[r.random_range(0..i)].sim.clone()
        } else {
            (0..len).map(|_| r.random_range(-0.04..0.04)).collect()
        };
        out.push(CandidateRewards {
            id: format!("cand{:02}", r.random_range(0..100)) + &format!("-{i}"),
            sim,
            real: Vec::new(),
        });
    }
    let incumbent = if r.random_bool(0.7) {
        let k = r.random_range(0..n);
        let real_len = r.random_range(1..=len);
        out[k].real = (0..real_len).map(|_| r.random_range(-0.04..0.04)).collect();
        Some(out[k].id.clone())
    } else {
        None
    };
    (out, incumbent)
}

pub struct SelectionReport {
    pub cases: usize,
    pub score_mismatches: Vec<String>,
    pub argmax_mismatches: Vec<String>,
    pub scale_violations: Vec<String>,
}

/// `cases` random candidate sets scored by the engine and by the re-summation oracle, plus
/// a check that multiplying every series by one positive constant keeps the selection.
pub fn selection_contract(cases: usize, seed: u64) -> SelectionReport {
    let mut r = rng(seed);
    let mut rep = SelectionReport {
        cases,
        score_mismatches: Vec::new(),
        argmax_mismatches: Vec::new(),
        scale_violations: Vec::new(),
    };
    for i in 0..cases {
        let (cands, inc) = random_candidates(&mut r);
        let gamma = if r.random_bool(0.2) { 1.0 } else { r.random_range(0.5..1.0) };
        let hist: Vec<(f64, f64)> = (0..8).map(|_| (r.random_range(-0.02..0.03), r.random_range(-0.02..0.03))).collect();
        let w = adaptive_weights(&hist, 8).unwrap();
        let got = score_policies(&cands, gamma, w, inc.as_deref()).unwrap();
        for (id, s) in &got.scores {
            let c = cands.iter().find(|c| &c.id == id).unwrap();
            let want = oracle_score(c, gamma, w);
            if (s - want).abs() > 1e-12 * want.abs().max(1e-3) {
                rep.score_mismatches.push(format!("case {i} {id}: {s} vs {want}"));
            }
        }
        let want = oracle_select(&cands, gamma, w, inc.as_deref());
        if got.selected != want {
            rep.argmax_mismatches.push(format!("case {i}: {} vs {want}", got.selected));
        }
        let c = 10f64.powf(r.random_range(-3.0..3.0));
        let scaled: Vec<CandidateRewards> = cands
            .iter()
            .map(|k| CandidateRewards {
                id: k.id.clone(),
                sim: k.sim.iter().map(|x| x * c).collect(),
                real: k.real.iter().map(|x| x * c).collect(),
            })
            .collect();
        let again = score_policies(&scaled, gamma, w, inc.as_deref()).unwrap();
        if again.selected != got.selected {
            rep.scale_violations.push(format!("case {i} scale {c}: {} vs {}", again.selected, got.selected));
        }
    }
    rep
}
