//! Portfolio risk score and the risk-alert trigger.
//!
//! The score combines four normalized components: portfolio beta, inverse liquidity ratio,
//! largest sector exposure and portfolio volatility. A risk alert fires when the weighted
//! score is strictly above the threshold, with hysteresis so a sustained drawdown does not
//! fire every day. Stress severity and news sentiment are simple deterministic stubs.

mod sentiment;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::marketdata::{AssetMeta, MarketView};
use crate::portfolio::{Account, Mark, PortfolioError, Quotes};

pub use sentiment::{sentiment_score, Lexicon, LexiconSentiment, SentimentProvider};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiskError {
    #[error("need at least {needed} aligned returns, got {got}")]
    InsufficientHistory { needed: usize, got: usize },
    #[error("return series are not aligned ({0} vs {1})")]
    Misaligned(usize, usize),
    #[error("benchmark returns have zero variance")]
    DegenerateBenchmark,
    #[error("account net value is zero")]
    DegenerateAccount,
    #[error("risk weights must be non-negative and sum to 1, got {0:?}")]
    InvalidWeights([f64; 4]),
    #[error(transparent)]
    Portfolio(#[from] PortfolioError),
}

pub type Result<T> = std::result::Result<T, RiskError>;

/// Minimum aligned returns for a beta estimate.
pub const MIN_BETA_HISTORY: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RiskConfig {
    pub beta_window: usize,
    pub sigma_window: usize,
    /// Fraction of average daily traded value that can be sold in one session.
    pub participation: f64,
    /// Weights for (beta, inverse liquidity, max sector exposure, volatility).
    pub weights: [f64; 4],
    pub trigger: f64,
    pub rearm_below: f64,
    pub cooldown_days: usize,
    /// Uniform price shocks, e.g. -0.1 for a 10% drop.
    pub shocks: Vec<f64>,
    /// |beta| at which the beta component saturates.
    pub beta_cap: f64,
    /// Liquidity ratio at which the liquidity component saturates.
    pub lr_floor: f64,
    /// Volatility saturates at this multiple of the benchmark's trailing volatility.
    pub sigma_ref_multiple: f64,
}

impl Default for RiskConfig {
    fn default() -> Self {
        RiskConfig {
            beta_window: 60,
            sigma_window: 20,
            participation: 0.1,
            weights: [0.3, 0.2, 0.2, 0.3],
            trigger: 0.75,
            rearm_below: 0.6,
            cooldown_days: 5,
            shocks: vec![-0.1, -0.2, -0.3],
            beta_cap: 2.0,
            lr_floor: 0.1,
            sigma_ref_multiple: 3.0,
        }
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_std(x: &[f64]) -> f64 {
    if x.len() < 2 || x.iter().all(|v| *v == x[0]) {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

/// `cov(port, bench) / var(bench)` over the trailing `window` aligned returns.
pub fn portfolio_beta(port: &[f64], bench: &[f64], window: usize) -> Result<f64> {
    if port.len() != bench.len() {
        return Err(RiskError::Misaligned(port.len(), bench.len()));
    }
    if port.len() < MIN_BETA_HISTORY {
        return Err(RiskError::InsufficientHistory {
            needed: MIN_BETA_HISTORY,
            got: port.len(),
        });
    }
    let start = port.len().saturating_sub(window);
    let (p, b) = (&port[start..], &bench[start..]);
    if b.iter().all(|x| *x == b[0]) {
        return Err(RiskError::DegenerateBenchmark);
    }
    let (mp, mb) = (mean(p), mean(b));
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in p.iter().zip(b) {
        cov += (x - mp) * (y - mb);
        var += (y - mb) * (y - mb);
    }
    if var == 0.0 {
        return Err(RiskError::DegenerateBenchmark);
    }
    Ok(cov / var)
}

/// Sample std of the trailing `window` returns; zero when fewer than two.
pub fn portfolio_sigma(port: &[f64], window: usize) -> f64 {
    sample_std(&port[port.len().saturating_sub(window)..])
}

/// `(cash + Σ min(value_i, participation · ADV_i · close_i)) / net value`.
pub fn liquidity_ratio(
    acct: &Account,
    meta: &BTreeMap<String, AssetMeta>,
    quotes: &impl Quotes,
    participation: f64,
) -> Result<f64> {
    let mark = acct.mark(quotes)?;
    if mark.net_value <= 0.0 {
        return Err(RiskError::DegenerateAccount);
    }
    let mut liquid = acct.cash;
    for (s, p) in &acct.positions {
        let close = quotes.quote(s).map(|q| q.close).unwrap_or(0.0);
        let value = p.quantity as f64 * close;
        let adv = meta.get(s).map_or(0.0, |m| m.average_daily_volume);
        liquid += value.min(participation * adv * close);
    }
    Ok(liquid / mark.net_value)
}

/// Fraction of net value held in each sector. Unlabelled symbols count under their own name.
pub fn sector_exposure(mark: &Mark, sector_of: impl Fn(&str) -> Option<String>) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (s, w) in &mark.weights {
        *out.entry(sector_of(s).unwrap_or_else(|| s.clone())).or_insert(0.0) += w;
    }
    out
}

/// Raw (unnormalized) inputs to the score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawComponents {
    pub beta: f64,
    pub liquidity_ratio: f64,
    pub max_sector_exposure: f64,
    pub sigma: f64,
    /// Trailing volatility of the benchmark, the reference scale for `sigma`.
    pub benchmark_sigma: f64,
}

/// Maps raw components into [0, 1]: |β|/cap, (1/LR − 1)/(1/floor − 1), max SE as is, and
/// σ over a multiple of the benchmark's σ, each clipped.
pub fn normalize(raw: &RawComponents, cfg: &RiskConfig) -> [f64; 4] {
    let clip = |x: f64| if x.is_nan() { 1.0 } else { x.clamp(0.0, 1.0) };
    let beta = clip(raw.beta.abs() / cfg.beta_cap);
    let liquidity = if raw.liquidity_ratio <= 0.0 {
        1.0
    } else {
        clip((1.0 / raw.liquidity_ratio - 1.0) / (1.0 / cfg.lr_floor - 1.0))
    };
    let sector = clip(raw.max_sector_exposure);
    let reference = cfg.sigma_ref_multiple * raw.benchmark_sigma;
    let sigma = if raw.sigma == 0.0 {
        0.0
    } else if reference == 0.0 {
        1.0
    } else {
        clip(raw.sigma / reference)
    };
    [beta, liquidity, sector, sigma]
}

pub fn validate_weights(w: &[f64; 4]) -> Result<()> {
    if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(RiskError::InvalidWeights(*w));
    }
    Ok(())
}

/// Weighted sum of normalized components, `w1·x1 + w2·x2 + w3·x3 + w4·x4`.
pub fn risk_score(normalized: &[f64; 4], weights: &[f64; 4]) -> Result<f64> {
    validate_weights(weights)?;
    let s = weights[0] * normalized[0] + weights[1] * normalized[1] + weights[2] * normalized[2] + weights[3] * normalized[3];
    Ok(s.clamp(0.0, 1.0))
}

/// Strictly above 0.75.
pub fn should_trigger_ram(r_score: f64) -> bool {
    r_score > 0.75
}

/// Re-trigger suppression: after firing, the alert is held back until the score has
/// dropped below `rearm_below` or `cooldown_days` trading days have passed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RamGate {
    last_fired: Option<usize>,
    rearmed: bool,
}

impl RamGate {
    /// Feeds the score for trading day `day` (an increasing index); true when an alert fires.
    pub fn check(&mut self, score: f64, day: usize, cfg: &RiskConfig) -> bool {
        if score < cfg.rearm_below {
            self.rearmed = true;
        }
        if score <= cfg.trigger {
            return false;
        }
        let allowed = match self.last_fired {
            None => true,
            Some(d) => self.rearmed || day - d >= cfg.cooldown_days,
        };
        if allowed {
            self.last_fired = Some(day);
            self.rearmed = false;
        }
        allowed
    }
}

/// Worst loss fraction across uniform shocks, divided by the largest shock: equals the
/// invested fraction of net value, clipped to [0, 1].
pub fn stress_severity(mark: &Mark, shocks: &[f64]) -> f64 {
    let worst_shock = shocks.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if worst_shock == 0.0 || mark.net_value <= 0.0 {
        return 0.0;
    }
    let invested = mark.invested();
    let worst_loss = shocks.iter().fold(0.0f64, |m, s| m.max(invested * s.abs()));
    (worst_loss / worst_shock).clamp(0.0, 1.0)
}

/// Equal-weight mean of the universe's daily close returns over the last `n` sessions
/// ending at the cursor. A symbol contributes on a day only if it traded on both days.
pub fn benchmark_returns(view: &MarketView, n: usize) -> Vec<f64> {
    let days = view.calendar();
    let start = days.len().saturating_sub(n + 1);
    let days = &days[start..];
    let closes: Vec<BTreeMap<chrono::NaiveDate, f64>> = view
        .universe()
        .iter()
        .map(|s| view.trailing(s, n + 1).iter().map(|b| (b.date, b.close)).collect())
        .collect();
    days.windows(2)
        .map(|w| {
            let rs: Vec<f64> = closes
                .iter()
                .filter_map(|c| Some(c.get(&w[1])? / c.get(&w[0])? - 1.0))
                .collect();
            if rs.is_empty() {
                0.0
            } else {
                mean(&rs)
            }
        })
        .collect()
}

/// Returns the current weights would have earned over the last `n` sessions: each day
/// `Σ w_i · r_i`, with cash earning zero and missing bars counting as a zero return.
pub fn holdings_returns(mark: &Mark, view: &MarketView, n: usize) -> Vec<f64> {
    let days = view.calendar();
    let start = days.len().saturating_sub(n + 1);
    let days = &days[start..];
    let mut out = vec![0.0; days.len().saturating_sub(1)];
    for (s, w) in &mark.weights {
        let closes: BTreeMap<chrono::NaiveDate, f64> = view.trailing(s, n + 1).iter().map(|b| (b.date, b.close)).collect();
        for (k, pair) in days.windows(2).enumerate() {
            if let (Some(a), Some(b)) = (closes.get(&pair[0]), closes.get(&pair[1])) {
                out[k] += w * (b / a - 1.0);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub date: chrono::NaiveDate,
    pub beta_p: f64,
    pub liquidity_ratio: f64,
    pub sector_exposure: BTreeMap<String, f64>,
    pub sigma_p: f64,
    pub benchmark_sigma: f64,
    /// (beta, inverse liquidity, max sector exposure, volatility) in [0, 1].
    pub normalized: [f64; 4],
    pub weights: [f64; 4],
    pub r_score: f64,
    pub eta: f64,
    pub tau: f64,
    /// True when there was too little history for beta; beta is then reported as 0.
    pub warm_up: bool,
}

/// Full risk assessment of `acct` at the view's cursor.
pub fn assess(
    acct: &Account,
    view: &MarketView,
    cfg: &RiskConfig,
    sentiment: &dyn SentimentProvider,
) -> Result<RiskReport> {
    let mark = acct.mark(view)?;
    let n = cfg.beta_window.max(cfg.sigma_window);
    let port = holdings_returns(&mark, view, n);
    let bench = benchmark_returns(view, n);
    let (beta, warm_up) = match portfolio_beta(&port, &bench, cfg.beta_window) {
        Ok(b) => (b, false),
        Err(RiskError::InsufficientHistory { .. }) | Err(RiskError::DegenerateBenchmark) => (0.0, true),
        Err(e) => return Err(e),
    };
    let sigma_p = portfolio_sigma(&port, cfg.sigma_window);
    let benchmark_sigma = portfolio_sigma(&bench, cfg.sigma_window);
    let meta: BTreeMap<String, AssetMeta> = acct
        .positions
        .keys()
        .filter_map(|s| view.asset_meta(s).map(|m| (s.clone(), m)))
        .collect();
    let lr = liquidity_ratio(acct, &meta, view, cfg.participation)?;
    let se = sector_exposure(&mark, |s| view.sector(s).map(str::to_string));
    let raw = RawComponents {
        beta,
        liquidity_ratio: lr,
        max_sector_exposure: se.values().copied().fold(0.0, f64::max),
        sigma: sigma_p,
        benchmark_sigma,
    };
    let normalized = normalize(&raw, cfg);
    let r_score = risk_score(&normalized, &cfg.weights)?;
    let held: Vec<String> = acct.positions.keys().cloned().collect();
    let week_ago = view.calendar().iter().rev().nth(4).copied().unwrap_or(view.cursor());
    Ok(RiskReport {
        date: view.cursor(),
        beta_p: beta,
        liquidity_ratio: lr,
        sector_exposure: se,
        sigma_p,
        benchmark_sigma,
        normalized,
        weights: cfg.weights,
        r_score,
        eta: stress_severity(&mark, &cfg.shocks),
        tau: sentiment.score(view.news_since(week_ago), &held),
        warm_up,
    })
}
