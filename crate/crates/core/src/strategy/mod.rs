//! Strategy pool, target-weight rules and walk-forward simulated trading.
//!
//! A strategy maps a [`MarketView`](crate::marketdata::MarketView) to long-only target
//! weights. The pool is the Cartesian product of indicator rules over a parameter grid plus
//! three classical baselines (mean–variance, Z-score mean reversion, time-series momentum).
//! [`simulate`] backtests one strategy with weekly rebalancing through the portfolio ledger.

mod backtest;
mod weights;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indicators::{lookup, reads_future, IndicatorError, IndicatorSpec};
use crate::marketdata::DataError;
use crate::portfolio::PortfolioError;

pub use backtest::{evaluate_pool, select_candidates, simulate, BacktestResult, Selection, SimConfig, WeightCache};
pub use weights::{mean_variance_weights, project_simplex, target_weights, TargetWeights};

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("strategy config: {0}")]
    Config(String),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error("window {start}..{end} has {days} trading days; {needed} needed")]
    InsufficientWindow {
        start: chrono::NaiveDate,
        end: chrono::NaiveDate,
        days: usize,
        needed: usize,
    },
    #[error("no backtest result for strategy `{0}`")]
    MissingResult(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Portfolio(#[from] PortfolioError),
}

pub type Result<T> = std::result::Result<T, StrategyError>;

/// Which end of the ranked signal an indicator rule buys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Highest normalized signal first.
    High,
    /// Lowest normalized signal first.
    Low,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyKind {
    /// Rank the universe by a normalized indicator value and equal-weight the top `top_k`
    /// (each slot gets `1/top_k`). With `min_signal`, only assets at or beyond it qualify.
    IndicatorRule {
        indicator: IndicatorSpec,
        direction: Direction,
        top_k: usize,
        #[serde(default)]
        min_signal: Option<f64>,
    },
    /// Long-only mean–variance on trailing daily returns.
    MeanVariance { window: usize, risk_aversion: f64 },
    /// Buy the `top_k` most oversold assets with z-score ≤ −`z_threshold`.
    ZScoreMeanReversion {
        window: usize,
        z_threshold: f64,
        top_k: usize,
    },
    /// Buy the `top_k` assets with the largest positive trailing return.
    TimeSeriesMomentum { lookback: usize, top_k: usize },
    /// Stays in cash.
    Cash,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub id: String,
    #[serde(flatten)]
    pub kind: StrategyKind,
    pub description: String,
}

impl Strategy {
    /// Validates `kind`; indicator specs are stored with every default spelled out.
    pub fn new(mut kind: StrategyKind) -> Result<Self> {
        validate_kind(&kind)?;
        if let StrategyKind::IndicatorRule { indicator, .. } = &mut kind {
            *indicator = indicator.canonical().parse()?;
        }
        let (id, description) = describe(&kind);
        Ok(Strategy { id, kind, description })
    }

    pub fn is_classical(&self) -> bool {
        matches!(
            self.kind,
            StrategyKind::MeanVariance { .. }
                | StrategyKind::ZScoreMeanReversion { .. }
                | StrategyKind::TimeSeriesMomentum { .. }
        )
    }

    /// Trading days of history needed before the first meaningful signal.
    pub fn lookback(&self) -> usize {
        match &self.kind {
            StrategyKind::IndicatorRule { indicator, .. } => {
                let mut params = lookup(indicator.name())
                    .map(|e| e.template().params().clone())
                    .unwrap_or_default();
                params.extend(indicator.params().clone());
                params
                    .into_values()
                    .filter_map(|v| match v {
                        crate::indicators::ParamValue::Num(x) => Some(x as usize),
                        _ => None,
                    })
                    .max()
                    .unwrap_or(1)
                    + 1
            }
            StrategyKind::MeanVariance { window, .. } => window + 1,
            StrategyKind::ZScoreMeanReversion { window, .. } => *window,
            StrategyKind::TimeSeriesMomentum { lookback, .. } => lookback + 1,
            StrategyKind::Cash => 1,
        }
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn describe(kind: &StrategyKind) -> (String, String) {
    match kind {
        StrategyKind::IndicatorRule {
            indicator,
            direction,
            top_k,
            min_signal,
        } => {
            let dir = match direction {
                Direction::High => "high",
                Direction::Low => "low",
            };
            let mut id = format!("rule:{}:{dir}:k{top_k}", indicator.canonical());
            let mut desc = format!(
                "Equal-weight the {top_k} assets with the {} normalized {} reading",
                if *direction == Direction::High { "highest" } else { "lowest" },
                indicator.canonical()
            );
            if let Some(m) = min_signal {
                id.push_str(&format!(":min{}", fmt_num(*m)));
                desc.push_str(&format!(", requiring a signal {} {}", if *direction == Direction::High { "≥" } else { "≤" }, fmt_num(*m)));
            }
            (id, desc)
        }
        StrategyKind::MeanVariance { window, risk_aversion } => (
            format!("mv:w{window}:g{}", fmt_num(*risk_aversion)),
            format!("Long-only mean-variance over {window} daily returns, risk aversion {}", fmt_num(*risk_aversion)),
        ),
        StrategyKind::ZScoreMeanReversion {
            window,
            z_threshold,
            top_k,
        } => (
            format!("zmr:w{window}:z{}:k{top_k}", fmt_num(*z_threshold)),
            format!(
                "Buy up to {top_k} assets whose {window}-day z-score is at or below -{}",
                fmt_num(*z_threshold)
            ),
        ),
        StrategyKind::TimeSeriesMomentum { lookback, top_k } => (
            format!("tsm:l{lookback}:k{top_k}"),
            format!("Buy up to {top_k} assets with the largest positive {lookback}-day return"),
        ),
        StrategyKind::Cash => ("cash".into(), "Hold cash".into()),
    }
}

fn validate_kind(kind: &StrategyKind) -> Result<()> {
    let bad = |m: &str| Err(StrategyError::Config(m.to_string()));
    match kind {
        StrategyKind::IndicatorRule { indicator, top_k, .. } => {
            let entry = lookup(indicator.name())?;
            indicator.resolved(entry)?;
            if reads_future(indicator) {
                return bad(&format!("{} reads future bars and cannot drive trading", indicator.canonical()));
            }
            if *top_k == 0 {
                return bad("top_k must be positive");
            }
        }
        StrategyKind::MeanVariance { window, risk_aversion } => {
            if *window < 2 || !(risk_aversion.is_finite() && *risk_aversion >= 0.0) {
                return bad("mean-variance needs window ≥ 2 and risk aversion ≥ 0");
            }
        }
        StrategyKind::ZScoreMeanReversion {
            window,
            z_threshold,
            top_k,
        } => {
            if *window < 2 || *top_k == 0 || !(z_threshold.is_finite() && *z_threshold >= 0.0) {
                return bad("z-score reversion needs window ≥ 2, top_k ≥ 1, threshold ≥ 0");
            }
        }
        StrategyKind::TimeSeriesMomentum { lookback, top_k } => {
            if *lookback == 0 || *top_k == 0 {
                return bad("momentum needs lookback ≥ 1 and top_k ≥ 1");
            }
        }
        StrategyKind::Cash => {}
    }
    Ok(())
}

/// Parameter grid for the pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoolConfig {
    pub indicators: Vec<IndicatorSpec>,
    pub top_k: Vec<usize>,
    pub directions: Vec<Direction>,
    pub min_signals: Vec<Option<f64>>,
    /// Upper bound on pool size, classical strategies included.
    pub max_size: usize,
    pub mv_window: usize,
    pub mv_risk_aversion: f64,
    pub zmr_window: usize,
    pub zmr_threshold: f64,
    pub zmr_top_k: usize,
    pub tsm_lookback: usize,
    pub tsm_top_k: usize,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig {
            indicators: ["SMA(n=20)", "EMA(n=10)", "RSI(n=14)", "MACD", "ROC(n=12)", "BOLL"]
                .iter()
                .map(|s| s.parse().expect("default indicator specs parse"))
                .collect(),
            top_k: vec![3, 5],
            directions: vec![Direction::High],
            min_signals: vec![None],
            max_size: 64,
            mv_window: 60,
            mv_risk_aversion: 1.0,
            zmr_window: 20,
            zmr_threshold: 1.0,
            zmr_top_k: 3,
            tsm_lookback: 60,
            tsm_top_k: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyPool {
    pub strategies: Vec<Strategy>,
    pub config: PoolConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl StrategyPool {
    pub fn get(&self, id: &str) -> Option<&Strategy> {
        self.strategies.iter().find(|s| s.id == id)
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }
}

/// Builds the pool: indicator specs × directions × thresholds × top-k, deduplicated by id,
/// plus MV, ZMR and TSM. Above `max_size`, rule strategies are truncated in id order and a
/// warning is recorded; the classical three are always kept.
pub fn generate_pool(config: &PoolConfig) -> Result<StrategyPool> {
    if config.indicators.is_empty() || config.top_k.is_empty() || config.directions.is_empty() || config.min_signals.is_empty() {
        return Err(StrategyError::Config("every grid dimension needs at least one value".into()));
    }
    if config.max_size < 3 {
        return Err(StrategyError::Config("max_size must leave room for the three classical strategies".into()));
    }
    let mut rules: BTreeMap<String, Strategy> = BTreeMap::new();
    for spec in &config.indicators {
        for direction in &config.directions {
            for min_signal in &config.min_signals {
                for k in &config.top_k {
                    let s = Strategy::new(StrategyKind::IndicatorRule {
                        indicator: spec.clone(),
                        direction: *direction,
                        top_k: *k,
                        min_signal: *min_signal,
                    })?;
                    rules.entry(s.id.clone()).or_insert(s);
                }
            }
        }
    }
    let classical = [
        StrategyKind::MeanVariance {
            window: config.mv_window,
            risk_aversion: config.mv_risk_aversion,
        },
        StrategyKind::ZScoreMeanReversion {
            window: config.zmr_window,
            z_threshold: config.zmr_threshold,
            top_k: config.zmr_top_k,
        },
        StrategyKind::TimeSeriesMomentum {
            lookback: config.tsm_lookback,
            top_k: config.tsm_top_k,
        },
    ]
    .into_iter()
    .map(Strategy::new)
    .collect::<Result<Vec<_>>>()?;

    let mut warnings = Vec::new();
    let room = config.max_size - classical.len();
    if rules.len() > room {
        let msg = format!(
            "strategy pool capped at {}: dropped {} indicator rules after id order",
            config.max_size,
            rules.len() - room
        );
        tracing::warn!("{msg}");
        warnings.push(msg);
    }
    let mut strategies: Vec<Strategy> = rules.into_values().take(room).collect();
    strategies.extend(classical);
    strategies.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(StrategyPool {
        strategies,
        config: config.clone(),
        warnings,
    })
}
