//! Brute-force reference metrics: quadratic drawdown scan, two-pass moments and direct
//! entropy sums. Deliberately written without sharing code with the library.

use rand::Rng;

pub fn returns(nv: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..nv.len() {
        out.push((nv[i] - nv[i - 1]) / nv[i - 1]);
    }
    out
}

fn mean(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in x {
        s += v;
    }
    s / x.len() as f64
}

/// Two-pass sample variance.
fn var(x: &[f64]) -> f64 {
    let m = mean(x);
    let mut s = 0.0;
    for v in x {
        s += (v - m).powi(2);
    }
    s / (x.len() as f64 - 1.0)
}

pub fn tr(nv: &[f64]) -> f64 {
    100.0 * (nv[nv.len() - 1] / nv[0] - 1.0)
}

pub fn arr(nv: &[f64]) -> f64 {
    let years = (nv.len() - 1) as f64 / 252.0;
    100.0 * ((nv[nv.len() - 1].ln() - nv[0].ln()) / years).exp_m1()
}

pub fn sr(nv: &[f64]) -> Option<f64> {
    let r = returns(nv);
    let sd = var(&r).sqrt();
    (sd > 0.0).then(|| mean(&r) / sd)
}

pub fn sor(nv: &[f64]) -> Option<f64> {
    let r = returns(nv);
    let mut sq = 0.0;
    let mut k = 0usize;
    for v in &r {
        if *v < 0.0 {
            sq += v * v;
            k += 1;
        }
    }
    (k >= 2).then(|| mean(&r) / (sq / (k as f64 - 1.0)).sqrt())
}

/// O(n²): every (peak, later trough) pair.
pub fn mdd(nv: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..nv.len() {
        for j in i..nv.len() {
            worst = worst.max(1.0 - nv[j] / nv[i]);
        }
    }
    100.0 * worst
}

pub fn cr(nv: &[f64]) -> Option<f64> {
    let m = mdd(nv);
    (m > 0.0).then(|| arr(nv) / m)
}

pub fn vol(nv: &[f64]) -> f64 {
    100.0 * (252.0 * var(&returns(nv))).sqrt()
}

pub fn ent(w: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for row in w {
        let mut h = 0.0;
        for p in row {
            if *p > 0.0 {
                h -= p * p.ln();
            }
        }
        total += h;
    }
    total / w.len() as f64
}

pub fn enb(w: &[Vec<f64>]) -> Option<f64> {
    let mut total = 0.0;
    for row in w {
        let mut s = 0.0;
        for p in row {
            if *p > 0.0 {
                s += (p * p.ln()) * (p * p.ln());
            }
        }
        if s == 0.0 {
            return None;
        }
        total += 1.0 / s;
    }
    Some(total / w.len() as f64)
}

/// All nine in report key order.
pub fn all(nv: &[f64], w: &[Vec<f64>]) -> [Option<f64>; 9] {
    [
        Some(tr(nv)),
        Some(arr(nv)),
        sr(nv),
        sor(nv),
        cr(nv),
        Some(mdd(nv)),
        Some(vol(nv)),
        Some(ent(w)),
        enb(w),
    ]
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

/// A random net-value path (3 to 399 points) and matching simplex weights, some zero.
pub fn random_case(seed: u64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut rng = super::gen::rng(seed);
    let len = rng.random_range(3..400);
    let drift = rng.random_range(-0.002..0.003);
    let scale = rng.random_range(0.001..0.04);
    let mut nv = vec![rng.random_range(1.0..1e6)];
    for _ in 1..len {
        let r: f64 = drift + scale * (rng.random::<f64>() * 2.0 - 1.0);
        let last = *nv.last().unwrap();
        nv.push(last * (1.0 + r).max(0.05));
    }
    let k = rng.random_range(1..12);
    let w = (0..len)
        .map(|_| {
            let raw: Vec<f64> = (0..k)
                .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() })
                .collect();
            let s: f64 = raw.iter().sum();
            if s == 0.0 {
                let mut one = vec![0.0; k];
                one[0] = 1.0;
                one
            } else {
                raw.iter().map(|x| x / s).collect()
            }
        })
        .collect();
    (nv, w)
}
