//! Seeded random inputs for oracle and property tests.

#![allow(dead_code)]

use chrono::NaiveDate;
use fundsim_core::indicators::Ohlcv;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Geometric random walk with consistent OHLC ranges and random integer volume.
pub fn random_ohlcv(seed: u64, len: usize) -> Ohlcv {
    let mut r = rng(seed);
    let step = Normal::new(0.0, 0.02).unwrap();
    let d0 = NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
    let mut out = Ohlcv::default();
    let mut close: f64 = r.random_range(20.0..200.0);
    for i in 0..len {
        let open = close * (step.sample(&mut r) * 0.3f64).exp();
        close *= step.sample(&mut r).exp();
        let top = open.max(close);
        let bottom = open.min(close);
        out.dates.push(d0 + chrono::Days::new(i as u64));
        out.open.push(open);
        out.close.push(close);
        out.high.push(top * (1.0 + r.random_range(0.0..0.02)));
        out.low.push(bottom * (1.0 - r.random_range(0.0..0.02)));
        out.volume.push(r.random_range(10_000u64..2_000_000) as f64);
    }
    out
}
