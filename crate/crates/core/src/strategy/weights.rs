use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Direction, Result, Strategy, StrategyKind};
use crate::indicators::{compute_raw, lookup, Ohlcv};
use crate::marketdata::MarketView;

/// Long-only target weights; whatever is not allocated stays in cash.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TargetWeights {
    pub weights: BTreeMap<String, f64>,
    /// True when no asset had enough history for a signal.
    pub warm_up: bool,
}

impl TargetWeights {
    pub fn cash() -> Self {
        TargetWeights::default()
    }

    pub fn cash_weight(&self) -> f64 {
        1.0 - self.weights.values().sum::<f64>()
    }

    /// Weights over `symbols` followed by cash.
    pub fn simplex(&self, symbols: &[String]) -> Vec<f64> {
        let mut v: Vec<f64> = symbols.iter().map(|s| self.weights.get(s).copied().unwrap_or(0.0)).collect();
        v.push(self.cash_weight());
        v
    }
}

/// Target weights of `strategy` at the view's cursor. Reads only bars at or before the
/// cursor; assets that did not trade on the cursor day are skipped.
pub fn target_weights(strategy: &Strategy, view: &MarketView) -> Result<TargetWeights> {
    let tradable: Vec<&String> = view
        .universe()
        .iter()
        .filter(|s| view.bar_at_cursor(s).is_some())
        .collect();
    match &strategy.kind {
        StrategyKind::Cash => Ok(TargetWeights::cash()),
        StrategyKind::IndicatorRule {
            indicator,
            direction,
            top_k,
            min_signal,
        } => {
            let scale = lookup(indicator.name())?.scale;
            let mut scored = Vec::new();
            for s in tradable {
                let data = Ohlcv::from_bars(view.history(s), view.price_field());
                let raw = compute_raw(indicator, &data)?;
                let v = *raw[0].last().expect("non-empty history");
                if v.is_nan() {
                    continue;
                }
                let n = data.len() - 1;
                let signal = scale.normalize(v, data.close[n], data.volume[n]);
                if !signal.is_finite() {
                    continue;
                }
                let signal = if *direction == Direction::High { signal } else { -signal };
                if let Some(m) = min_signal {
                    let m = if *direction == Direction::High { *m } else { -*m };
                    if signal < m {
                        continue;
                    }
                }
                scored.push((s.clone(), signal));
            }
            Ok(top_equal_weight(scored, *top_k))
        }
        StrategyKind::TimeSeriesMomentum { lookback, top_k } => {
            let mut scored = Vec::new();
            for s in tradable {
                let p = view.signal_prices(s);
                if p.len() <= *lookback {
                    continue;
                }
                let r = p[p.len() - 1] / p[p.len() - 1 - lookback] - 1.0;
                if r > 0.0 {
                    scored.push((s.clone(), r));
                }
            }
            Ok(top_equal_weight(scored, *top_k))
        }
        StrategyKind::ZScoreMeanReversion {
            window,
            z_threshold,
            top_k,
        } => {
            let mut scored = Vec::new();
            for s in tradable {
                let p = view.signal_prices(s);
                if p.len() < *window {
                    continue;
                }
                let w = &p[p.len() - window..];
                let m = w.iter().sum::<f64>() / *window as f64;
                let sd = (w.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (*window - 1) as f64).sqrt();
                if sd == 0.0 || !sd.is_finite() {
                    continue;
                }
                let z = (p[p.len() - 1] - m) / sd;
                if z <= -z_threshold {
                    scored.push((s.clone(), -z));
                }
            }
            Ok(top_equal_weight(scored, *top_k))
        }
        StrategyKind::MeanVariance { window, risk_aversion } => {
            let mut names = Vec::new();
            let mut rets: Vec<Vec<f64>> = Vec::new();
            for s in tradable {
                let p = view.signal_prices(s);
                if p.len() <= *window {
                    continue;
                }
                let tail = &p[p.len() - window - 1..];
                rets.push(tail.windows(2).map(|w| w[1] / w[0] - 1.0).collect());
                names.push(s.clone());
            }
            if names.is_empty() {
                return Ok(TargetWeights {
                    weights: BTreeMap::new(),
                    warm_up: true,
                });
            }
            let (mu, cov) = moments(&rets);
            let w = mean_variance_weights(&mu, &cov, *risk_aversion);
            Ok(TargetWeights {
                weights: names.into_iter().zip(w).filter(|(_, w)| *w > 0.0).collect(),
                warm_up: false,
            })
        }
    }
}

/// Highest score first, ties by symbol; each of the first `k` gets `1/k`.
fn top_equal_weight(mut scored: Vec<(String, f64)>, k: usize) -> TargetWeights {
    let warm_up = scored.is_empty();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    TargetWeights {
        weights: scored.into_iter().take(k).map(|(s, _)| (s, 1.0 / k as f64)).collect(),
        warm_up,
    }
}

/// Sample mean vector and covariance matrix of equally long return series.
fn moments(rets: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = rets[0].len() as f64;
    let mu: Vec<f64> = rets.iter().map(|r| r.iter().sum::<f64>() / n).collect();
    let k = rets.len();
    let mut cov = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let c = rets[i]
                .iter()
                .zip(&rets[j])
                .map(|(a, b)| (a - mu[i]) * (b - mu[j]))
                .sum::<f64>()
                / (n - 1.0);
            cov[i][j] = c;
            cov[j][i] = c;
        }
    }
    (mu, cov)
}

/// Euclidean projection onto `{w ≥ 0, Σw = 1}` (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (i + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Maximizes `wᵀμ − (γ/2)·wᵀΣw` over the simplex by projected gradient ascent from the
/// uniform portfolio. The step is the inverse of a Gershgorin bound on `γΣ`.
pub fn mean_variance_weights(mu: &[f64], cov: &[Vec<f64>], gamma: f64) -> Vec<f64> {
    let k = mu.len();
    if k == 0 {
        return Vec::new();
    }
    let lip = cov
        .iter()
        .map(|row| row.iter().map(|c| c.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        * gamma;
    let mu_scale = mu.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let step = 1.0 / lip.max(mu_scale * 1e-3).max(1e-12);
    let mut w = vec![1.0 / k as f64; k];
    for _ in 0..20_000 {
        let grad: Vec<f64> = (0..k)
            .map(|i| mu[i] - gamma * cov[i].iter().zip(&w).map(|(c, x)| c * x).sum::<f64>())
            .collect();
        let next = project_simplex(&w.iter().zip(&grad).map(|(x, g)| x + step * g).collect::<Vec<_>>());
        let delta = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        w = next;
        if delta < 1e-13 {
            break;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_examples() {
        assert_eq!(project_simplex(&[0.5, 0.5]), vec![0.5, 0.5]);
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[0.3, -0.2, 0.9]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|x| *x >= 0.0));
    }

    #[test]
    fn symmetric_two_assets_split_evenly() {
        let w = mean_variance_weights(&[0.001, 0.001], &[vec![0.0004, 0.0], vec![0.0, 0.0004]], 1.0);
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_risk_aversion_picks_best_mean() {
        let w = mean_variance_weights(&[0.001, 0.002, 0.0], &[vec![1e-4; 3], vec![1e-4; 3], vec![1e-4; 3]], 0.0);
        assert!((w[1] - 1.0).abs() < 1e-12);
    }
}
