//! Evaluation metrics over a net-value series and a weight history.
//!
//! Percent-valued metrics (TR, ARR, MDD, Vol) are reported unscaled, e.g. `58.68` rather
//! than `0.5868`. Returns are simple per-period returns; ratios are per period and not
//! annualized.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Trading periods per year used for annualization by default.
pub const PERIODS_PER_YEAR: f64 = 252.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("net value must be positive and finite (index {0})")]
    NonPositive(usize),
    #[error("return series has zero variance")]
    DegenerateVariance,
    #[error("fewer than two negative returns; downside deviation undefined")]
    DegenerateDownside,
    #[error("maximum drawdown is zero")]
    DegenerateDrawdown,
    #[error("weights are fully concentrated on one slot at index {0}")]
    DegenerateConcentration(usize),
    #[error("weight vector {index}: {message}")]
    InvalidWeights { index: usize, message: String },
}

pub type Result<T> = std::result::Result<T, MetricError>;

/// Dated net values, strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetValueSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl NetValueSeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        check_positive(&values)?;
        if dates.len() != values.len() {
            return Err(MetricError::InsufficientData {
                needed: dates.len(),
                got: values.len(),
            });
        }
        Ok(Self { dates, values })
    }

    pub fn returns(&self) -> Vec<f64> {
        simple_returns(&self.values)
    }
}

fn check_positive(nv: &[f64]) -> Result<()> {
    match nv.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        Some(i) => Err(MetricError::NonPositive(i)),
        None => Ok(()),
    }
}

fn need(nv: &[f64], n: usize) -> Result<()> {
    if nv.len() < n {
        Err(MetricError::InsufficientData {
            needed: n,
            got: nv.len(),
        })
    } else {
        Ok(())
    }
}

pub fn simple_returns(nv: &[f64]) -> Vec<f64> {
    nv.windows(2).map(|w| w[1] / w[0] - 1.0).collect()
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Exactly zero for a constant series, which the plain two-pass form does not guarantee.
fn sample_std(x: &[f64]) -> f64 {
    if x.iter().all(|v| *v == x[0]) {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

/// Percent change from first to last net value.
pub fn total_return(nv: &[f64]) -> Result<f64> {
    need(nv, 2)?;
    check_positive(nv)?;
    Ok((nv[nv.len() - 1] - nv[0]) / nv[0] * 100.0)
}

/// Geometric annualization over `len - 1` periods: `((last/first)^(ppy/h) - 1) * 100`.
pub fn annual_return_rate(nv: &[f64], periods_per_year: f64) -> Result<f64> {
    need(nv, 2)?;
    check_positive(nv)?;
    let h = (nv.len() - 1) as f64;
    Ok(((nv[nv.len() - 1] / nv[0]).powf(periods_per_year / h) - 1.0) * 100.0)
}

/// `(mean(r) - r_f) / std(r)` with the sample standard deviation.
pub fn sharpe(returns: &[f64], r_f: f64) -> Result<f64> {
    need(returns, 2)?;
    let sd = sample_std(returns);
    if sd == 0.0 || !sd.is_finite() {
        return Err(MetricError::DegenerateVariance);
    }
    Ok((mean(returns) - r_f) / sd)
}

/// `(mean(r) - r_f) / σ_down`, where σ_down is the root of the sum of squared negative
/// returns divided by (count − 1): a downside deviation about zero.
pub fn sortino(returns: &[f64], r_f: f64) -> Result<f64> {
    need(returns, 2)?;
    let down: Vec<f64> = returns.iter().copied().filter(|r| *r < 0.0).collect();
    if down.len() < 2 {
        return Err(MetricError::DegenerateDownside);
    }
    let sd = (down.iter().map(|r| r * r).sum::<f64>() / (down.len() - 1) as f64).sqrt();
    Ok((mean(returns) - r_f) / sd)
}

/// Largest peak-to-trough decline, in percent.
pub fn max_drawdown(nv: &[f64]) -> Result<f64> {
    need(nv, 1)?;
    check_positive(nv)?;
    let mut peak = nv[0];
    let mut worst = 0.0f64;
    for v in nv {
        peak = peak.max(*v);
        worst = worst.max((peak - v) / peak);
    }
    Ok(worst * 100.0)
}

/// `sqrt(252) * std(r) * 100`.
pub fn volatility(returns: &[f64]) -> Result<f64> {
    need(returns, 2)?;
    Ok(PERIODS_PER_YEAR.sqrt() * sample_std(returns) * 100.0)
}

/// ARR over MDD, both in percent.
pub fn calmar(nv: &[f64], periods_per_year: f64) -> Result<f64> {
    let mdd = max_drawdown(nv)?;
    if mdd == 0.0 {
        return Err(MetricError::DegenerateDrawdown);
    }
    Ok(annual_return_rate(nv, periods_per_year)? / mdd)
}

/// Checks that every vector is non-negative and sums to one within 1e-9.
pub fn validate_weights(weights: &[Vec<f64>]) -> Result<()> {
    need_weights(weights)?;
    for (index, w) in weights.iter().enumerate() {
        if let Some(v) = w.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(MetricError::InvalidWeights {
                index,
                message: format!("entry {v} is negative or not finite"),
            });
        }
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(MetricError::InvalidWeights {
                index,
                message: format!("sums to {s}"),
            });
        }
    }
    Ok(())
}

fn need_weights(weights: &[Vec<f64>]) -> Result<()> {
    if weights.is_empty() {
        Err(MetricError::InsufficientData { needed: 1, got: 0 })
    } else {
        Ok(())
    }
}

fn plogp(p: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * p.ln()
    }
}

/// Time-averaged Shannon entropy of the weight vectors, in nats.
pub fn entropy(weights: &[Vec<f64>]) -> Result<f64> {
    validate_weights(weights)?;
    let total: f64 = weights.iter().map(|w| -w.iter().map(|p| plogp(*p)).sum::<f64>()).sum();
    Ok(total / weights.len() as f64)
}

/// Time average of `1 / Σ (p ln p)²`, exactly in that form. Note that this is not the
/// more common `exp(entropy)` or inverse-Herfindahl effective number of bets.
pub fn enb(weights: &[Vec<f64>]) -> Result<f64> {
    validate_weights(weights)?;
    let mut total = 0.0;
    for (i, w) in weights.iter().enumerate() {
        let s: f64 = w.iter().map(|p| plogp(*p).powi(2)).sum();
        if s == 0.0 {
            return Err(MetricError::DegenerateConcentration(i));
        }
        total += 1.0 / s;
    }
    Ok(total / weights.len() as f64)
}

/// The nine headline metrics; `None` where a metric is degenerate for the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(rename = "TR")]
    pub tr: Option<f64>,
    #[serde(rename = "ARR")]
    pub arr: Option<f64>,
    #[serde(rename = "SR")]
    pub sr: Option<f64>,
    #[serde(rename = "SoR")]
    pub sor: Option<f64>,
    #[serde(rename = "CR")]
    pub cr: Option<f64>,
    #[serde(rename = "MDD")]
    pub mdd: Option<f64>,
    #[serde(rename = "Vol")]
    pub vol: Option<f64>,
    #[serde(rename = "ENT")]
    pub ent: Option<f64>,
    #[serde(rename = "ENB")]
    pub enb: Option<f64>,
}

impl MetricsReport {
    pub const KEYS: [&'static str; 9] = ["TR", "ARR", "SR", "SoR", "CR", "MDD", "Vol", "ENT", "ENB"];

    /// Values in [`Self::KEYS`] order.
    pub fn values(&self) -> [Option<f64>; 9] {
        [self.tr, self.arr, self.sr, self.sor, self.cr, self.mdd, self.vol, self.ent, self.enb]
    }

    /// Computes every metric, leaving degenerate ones empty. `weights` may be empty, in
    /// which case ENT and ENB are empty.
    pub fn compute(nv: &[f64], weights: &[Vec<f64>], r_f: f64, periods_per_year: f64) -> Self {
        let r = simple_returns(nv);
        MetricsReport {
            tr: total_return(nv).ok(),
            arr: annual_return_rate(nv, periods_per_year).ok(),
            sr: sharpe(&r, r_f).ok(),
            sor: sortino(&r, r_f).ok(),
            cr: calmar(nv, periods_per_year).ok(),
            mdd: max_drawdown(nv).ok(),
            vol: volatility(&r).ok(),
            ent: entropy(weights).ok(),
            enb: enb(weights).ok(),
        }
    }
}
