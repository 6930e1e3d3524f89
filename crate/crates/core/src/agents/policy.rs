use serde::{Deserialize, Serialize};

use super::{AgentError, Result};

/// The simulated-reward ratio is clipped to `[-RATIO_CLIP, RATIO_CLIP]` before the logistic.
pub const RATIO_CLIP: f64 = 3.0;
/// Relative tolerance under which two policy scores count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `(w_sim, w_real)` from the last `n` periods of `(r_sim, r_real)`.
///
/// The ratio `Σr_sim / Σ(r_sim + r_real)` is taken as 0.5 when the denominator is zero,
/// clipped to ±[`RATIO_CLIP`], and passed through the logistic; `w_real` is its complement,
/// so the pair sums to exactly 1.
pub fn adaptive_weights(history: &[(f64, f64)], n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(AgentError::Config("reward window must be at least 1".into()));
    }
    if history.is_empty() {
        return Err(AgentError::Config("no reward periods recorded".into()));
    }
    let recent = &history[history.len().saturating_sub(n)..];
    let sim: f64 = recent.iter().map(|p| p.0).sum();
    let total: f64 = recent.iter().map(|p| p.0 + p.1).sum();
    let ratio = if total == 0.0 { 0.5 } else { sim / total };
    let ratio = if ratio.is_nan() { 0.5 } else { ratio.clamp(-RATIO_CLIP, RATIO_CLIP) };
    let w_sim = logistic(ratio);
    Ok((w_sim, 1.0 - w_sim))
}

/// Coefficients of the risk factor `r_risk = −(score·R + stress·η − sentiment·τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RiskMix {
    pub score: f64,
    pub stress: f64,
    pub sentiment: f64,
}

impl Default for RiskMix {
    fn default() -> Self {
        RiskMix {
            score: 0.5,
            stress: 0.4,
            sentiment: 0.1,
        }
    }
}

impl RiskMix {
    /// The risk factor for a score and stress in [0, 1] and a sentiment in [−1, 1]
    /// (inputs are clamped to those ranges).
    pub fn factor(&self, r_score: f64, eta: f64, tau: f64) -> f64 {
        -(self.score * r_score.clamp(0.0, 1.0) + self.stress * eta.clamp(0.0, 1.0) - self.sentiment * tau.clamp(-1.0, 1.0))
    }
}

/// `(1 − λ)·r + λ·r_risk`.
pub fn risk_adjusted_reward(r: f64, r_score: f64, eta: f64, tau: f64, lambda: f64, mix: &RiskMix) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(AgentError::Config(format!("risk mix lambda {lambda} outside [0, 1]")));
    }
    if lambda == 0.0 {
        return Ok(r);
    }
    Ok((1.0 - lambda) * r + lambda * mix.factor(r_score, eta, tau))
}

/// Per-period rewards of one candidate strategy, oldest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRewards {
    pub id: String,
    pub sim: Vec<f64>,
    /// Realized rewards; empty for a strategy that was never deployed.
    #[serde(default)]
    pub real: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRanking {
    /// (id, score), best first; exact ties keep the incumbent first, then id order.
    pub scores: Vec<(String, f64)>,
    pub selected: String,
}

/// Discounted dual-reward score `Σ_t γ^(T−t)·(w_sim·r_sim_t + w_real·r_real_t)`. Both
/// series are aligned at their most recent period; missing periods count as zero.
fn discounted(c: &CandidateRewards, gamma: f64, (w_sim, w_real): (f64, f64)) -> f64 {
    let len = c.sim.len().max(c.real.len());
    let at = |s: &[f64], i: usize| {
        let offset = len - s.len();
        if i < offset {
            0.0
        } else {
            s[i - offset]
        }
    };
    (0..len).fold(0.0, |acc, i| acc * gamma + w_sim * at(&c.sim, i) + w_real * at(&c.real, i))
}

/// Scores every candidate and selects the best. Scores within [`TIE_TOLERANCE`] (relative)
/// of the maximum are tied; among them the incumbent is kept, otherwise the smallest id wins.
pub fn score_policies(
    candidates: &[CandidateRewards],
    gamma: f64,
    weights: (f64, f64),
    incumbent: Option<&str>,
) -> Result<PolicyRanking> {
    if candidates.is_empty() {
        return Err(AgentError::Config("no candidate policies to score".into()));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(AgentError::Config(format!("discount {gamma} outside (0, 1]")));
    }
    let mut scores: Vec<(String, f64)> = candidates
        .iter()
        .map(|c| (c.id.clone(), discounted(c, gamma, weights)))
        .collect();
    if let Some((id, s)) = scores.iter().find(|(_, s)| !s.is_finite()) {
        return Err(AgentError::Config(format!("score of {id} is not finite ({s})")));
    }
    let is_inc = |id: &str| incumbent == Some(id);
    scores.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| is_inc(&b.0).cmp(&is_inc(&a.0)))
            .then_with(|| a.0.cmp(&b.0))
    });
    let best = scores[0].1;
    let tied = |s: f64| (best - s).abs() <= TIE_TOLERANCE * best.abs().max(s.abs());
    let contenders: Vec<&String> = scores.iter().filter(|(_, s)| tied(*s)).map(|(id, _)| id).collect();
    let selected = contenders
        .iter()
        .find(|id| is_inc(id))
        .or_else(|| contenders.iter().min())
        .map(|id| (*id).clone())
        .expect("at least one contender");
    Ok(PolicyRanking { scores, selected })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyConfig {
    /// Per-week discount.
    pub gamma: f64,
    /// Weight of the risk factor in the realized reward.
    pub lambda: f64,
    /// Recent periods used for the adaptive weights.
    pub window: usize,
    /// Candidates kept from each strategy meeting.
    pub top_m: usize,
    pub risk_mix: RiskMix,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            gamma: 0.99,
            lambda: 0.5,
            window: 8,
            top_m: 3,
            risk_mix: RiskMix::default(),
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(AgentError::Config(format!("gamma {} outside (0, 1]", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(AgentError::Config(format!("lambda {} outside [0, 1]", self.lambda)));
        }
        if self.window == 0 || self.top_m == 0 {
            return Err(AgentError::Config("window and top_m must be at least 1".into()));
        }
        Ok(())
    }
}

/// The deployed strategy, the latest candidates and the reward history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyState {
    pub active: String,
    pub candidates: Vec<String>,
    /// Per-period (r_sim, r_real) of the active strategy.
    pub history: Vec<(f64, f64)>,
    pub weights: (f64, f64),
    pub config: PolicyConfig,
}

impl PolicyState {
    pub fn new(active: &str, config: PolicyConfig) -> Result<Self> {
        config.validate()?;
        Ok(PolicyState {
            active: active.to_string(),
            candidates: Vec::new(),
            history: Vec::new(),
            weights: (0.5, 0.5),
            config,
        })
    }

    /// Appends a period and refreshes the adaptive weights.
    pub fn record(&mut self, r_sim: f64, r_real: f64) -> Result<(f64, f64)> {
        self.history.push((r_sim, r_real));
        self.weights = adaptive_weights(&self.history, self.config.window)?;
        Ok(self.weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn weight_examples() {
        let (s, r) = adaptive_weights(&[(5.0, 5.0)], 8).unwrap();
        assert!((s - 0.622_459_331_201_854_6).abs() < 1e-12);
        assert_eq!(s + r, 1.0);
        assert_eq!(adaptive_weights(&[(0.0, 10.0)], 8).unwrap().0, 0.5);
        assert_eq!(adaptive_weights(&[(1.0, -1.0)], 8).unwrap().0, logistic(0.5));
        assert_eq!(adaptive_weights(&[(1.0, -0.9)], 8).unwrap().0, logistic(3.0));
        assert!(adaptive_weights(&[], 8).is_err());
        assert!(adaptive_weights(&[(1.0, 1.0)], 0).is_err());
        // only the last n periods count
        let (a, _) = adaptive_weights(&[(100.0, 0.0), (1.0, 1.0)], 1).unwrap();
        assert_eq!(a, logistic(0.5));
    }

    #[test]
    fn risk_reward_examples() {
        let mix = RiskMix::default();
        assert_eq!(risk_adjusted_reward(0.03, 0.9, 0.9, -1.0, 0.0, &mix).unwrap(), 0.03);
        assert!((risk_adjusted_reward(0.0, 1.0, 1.0, -1.0, 1.0, &mix).unwrap() + 1.0).abs() < 1e-15);
        assert!((risk_adjusted_reward(0.02, 0.0, 0.0, 0.0, 0.5, &mix).unwrap() - 0.01).abs() < 1e-15);
        assert!(risk_adjusted_reward(0.0, 0.0, 0.0, 0.0, 1.5, &mix).is_err());
    }

    fn c(id: &str, sim: &[f64], real: &[f64]) -> CandidateRewards {
        CandidateRewards {
            id: id.into(),
            sim: sim.to_vec(),
            real: real.to_vec(),
        }
    }

    #[test]
    fn selection_examples() {
        let one = score_policies(&[c("x", &[-1.0], &[])], 0.99, (0.5, 0.5), None).unwrap();
        assert_eq!(one.selected, "x");
        let pair = [c("b", &[0.02, 0.0], &[]), c("a", &[0.01, 0.01], &[])];
        let r = score_policies(&pair, 1.0, (0.5, 0.5), None).unwrap();
        assert!((r.scores[0].1 - 0.01).abs() < 1e-15 && (r.scores[1].1 - 0.01).abs() < 1e-15);
        assert_eq!(r.selected, "a");
        assert_eq!(score_policies(&pair, 1.0, (0.5, 0.5), Some("b")).unwrap().selected, "b");
        // discounting favours the recent reward
        assert_eq!(score_policies(&pair, 0.9, (0.5, 0.5), None).unwrap().selected, "a");
        assert!(score_policies(&[], 0.9, (0.5, 0.5), None).is_err());
        assert!(score_policies(&pair, 0.0, (0.5, 0.5), None).is_err());
    }

    #[test]
    fn real_series_aligns_to_latest_period() {
        let r = score_policies(&[c("inc", &[0.0, 0.0, 0.0], &[1.0])], 0.5, (0.0, 1.0), None).unwrap();
        assert_eq!(r.scores[0].1, 1.0);
    }

    proptest! {
        #[test]
        fn weights_bounded_and_complementary(h in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..20), n in 1usize..12) {
            let (s, r) = adaptive_weights(&h, n).unwrap();
            prop_assert_eq!(s + r, 1.0);
            prop_assert!(s > 0.047 && s < 0.953);
        }

        #[test]
        fn selection_is_scale_invariant(
            sims in proptest::collection::vec(proptest::collection::vec(-0.05f64..0.05, 1..8), 1..6),
            scale in 0.01f64..100.0,
        ) {
            let cands: Vec<CandidateRewards> = sims.iter().enumerate().map(|(i, s)| c(&format!("s{i}"), s, &[])).collect();
            let scaled: Vec<CandidateRewards> = cands.iter().map(|k| c(&k.id, &k.sim.iter().map(|x| x * scale).collect::<Vec<_>>(), &[])).collect();
            let a = score_policies(&cands, 0.95, (0.6, 0.4), Some("s0")).unwrap();
            let b = score_policies(&scaled, 0.95, (0.6, 0.4), Some("s0")).unwrap();
            prop_assert_eq!(a.selected, b.selected);
        }
    }
}
