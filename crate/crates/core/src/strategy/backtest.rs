use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{target_weights, Result, Strategy, StrategyError, StrategyPool, TargetWeights};
use crate::marketdata::MarketView;
use crate::metrics::{MetricsReport, PERIODS_PER_YEAR};
use crate::portfolio::{Account, Action, Quotes, DEFAULT_FEE_RATE, DEFAULT_INITIAL_CASH};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub fee_rate: f64,
    pub initial_cash: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            fee_rate: DEFAULT_FEE_RATE,
            initial_cash: DEFAULT_INITIAL_CASH,
        }
    }
}

/// Memoized target weights keyed by (strategy id, cursor day). Valid for one dataset and
/// universe; weights at a day depend only on data up to that day, so entries computed
/// from any later view are still correct.
#[derive(Debug, Default)]
pub struct WeightCache {
    inner: Mutex<HashMap<(String, NaiveDate), TargetWeights>>,
}

impl WeightCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("weight cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_or_compute(&self, strategy: &Strategy, view: &MarketView) -> Result<TargetWeights> {
        let key = (strategy.id.clone(), view.cursor());
        if let Some(w) = self.inner.lock().expect("weight cache lock").get(&key) {
            return Ok(w.clone());
        }
        let w = target_weights(strategy, view)?;
        self.inner.lock().expect("weight cache lock").insert(key, w.clone());
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestResult {
    pub strategy_id: String,
    pub window: (NaiveDate, NaiveDate),
    pub dates: Vec<NaiveDate>,
    pub net_value: Vec<f64>,
    /// Per-period portfolio returns, one fewer than net values.
    pub rewards: Vec<f64>,
    pub metrics: MetricsReport,
}

fn iso_week(d: NaiveDate) -> (i32, u32) {
    let w = d.iso_week();
    (w.year(), w.week())
}

/// Walk-forward backtest of `strategy` over `[start, end]`, which must not extend past the
/// view's cursor. Starting from cash, targets are computed on the first day and on every
/// week-final day, and filled at the next session's close. Returns net value, per-period
/// rewards and metrics.
pub fn simulate(
    strategy: &Strategy,
    view: &MarketView,
    start: NaiveDate,
    end: NaiveDate,
    config: &SimConfig,
    cache: Option<&WeightCache>,
) -> Result<BacktestResult> {
    let end_view = view.at(end)?;
    let calendar = end_view.calendar();
    let days: Vec<NaiveDate> = calendar.iter().copied().filter(|d| *d >= start).collect();
    let history = calendar.len();
    let needed = strategy.lookback().max(2);
    if days.len() < 2 || history < needed {
        return Err(StrategyError::InsufficientWindow {
            start,
            end,
            days: days.len(),
            needed,
        });
    }
    let universe = view.universe().to_vec();
    let mut acct = Account::new(config.initial_cash, config.fee_rate);
    let mut pending: Option<TargetWeights> = None;
    let mut net_value = Vec::with_capacity(days.len());
    let mut simplexes = Vec::with_capacity(days.len());
    for (i, day) in days.iter().enumerate() {
        let v = view.at(*day)?;
        if let Some(t) = pending.take() {
            let weights: BTreeMap<String, f64> = t
                .weights
                .into_iter()
                .filter(|(s, _)| v.quote(s).is_some())
                .collect();
            acct.apply_action(&Action::Rebalance { weights }, &v, &strategy.id)?;
        }
        let mark = acct.mark(&v)?;
        net_value.push(mark.net_value);
        simplexes.push(mark.simplex(&universe));
        let last = i + 1 == days.len();
        if !last && (i == 0 || iso_week(*day) != iso_week(days[i + 1])) {
            pending = Some(match cache {
                Some(c) => c.get_or_compute(strategy, &v)?,
                None => target_weights(strategy, &v)?,
            });
        }
    }
    let rewards: Vec<f64> = net_value.windows(2).map(|w| w[1] / w[0] - 1.0).collect();
    let metrics = MetricsReport::compute(&net_value, &simplexes, 0.0, PERIODS_PER_YEAR);
    Ok(BacktestResult {
        strategy_id: strategy.id.clone(),
        window: (days[0], end),
        dates: days,
        net_value,
        rewards,
        metrics,
    })
}

/// Backtests every strategy in the pool over the same window, in parallel. Output order
/// follows the pool.
pub fn evaluate_pool(
    pool: &StrategyPool,
    view: &MarketView,
    start: NaiveDate,
    end: NaiveDate,
    config: &SimConfig,
    cache: Option<&WeightCache>,
) -> Result<Vec<BacktestResult>> {
    pool.strategies
        .par_iter()
        .map(|s| simulate(s, view, start, end, config, cache))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// The `top_m` strategies by Sharpe (descending), then MDD (ascending), then id. Missing
/// Sharpe ranks last, missing MDD ranks as worst.
pub fn select_candidates(pool: &StrategyPool, results: &[BacktestResult], top_m: usize) -> Result<Selection> {
    let by_id: HashMap<&str, &BacktestResult> = results.iter().map(|r| (r.strategy_id.as_str(), r)).collect();
    let mut ranked = Vec::with_capacity(pool.len());
    for s in &pool.strategies {
        let r = by_id
            .get(s.id.as_str())
            .ok_or_else(|| StrategyError::MissingResult(s.id.clone()))?;
        let sr = r.metrics.sr.unwrap_or(f64::NEG_INFINITY);
        let mdd = r.metrics.mdd.unwrap_or(f64::INFINITY);
        ranked.push((s.id.clone(), sr, mdd));
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.2.total_cmp(&b.2)).then_with(|| a.0.cmp(&b.0)));
    let mut warnings = Vec::new();
    if top_m > ranked.len() {
        let msg = format!("top_m {top_m} exceeds pool size {}; selecting all", ranked.len());
        tracing::warn!("{msg}");
        warnings.push(msg);
    }
    Ok(Selection {
        ids: ranked.into_iter().take(top_m).map(|r| r.0).collect(),
        warnings,
    })
}
