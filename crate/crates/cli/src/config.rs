//! Run configuration, read from a TOML file. Relative paths resolve against the file's
//! directory; every section except `[data]` and `output` has defaults.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use fundsim_core::agents::{HttpConfig, PolicyConfig, DEFAULT_QUERY_BUDGET, DEFAULT_RETRIES, RETRIEVE_K};
use fundsim_core::marketdata::Dataset;
use fundsim_core::meetings::{DeRiskConfig, EngineConfig};
use fundsim_core::portfolio::{DEFAULT_FEE_RATE, DEFAULT_INITIAL_CASH};
use fundsim_core::risk::{validate_weights, RiskConfig};
use fundsim_core::strategy::{PoolConfig, SimConfig};
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub dir: PathBuf,
    /// First simulated day; defaults to the earliest day with enough history.
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    /// Symbols to trade; empty means every symbol in the dataset.
    #[serde(default)]
    pub universe: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AccountSection {
    pub initial_capital: f64,
    pub fee_rate: f64,
}

impl Default for AccountSection {
    fn default() -> Self {
        AccountSection {
            initial_capital: DEFAULT_INITIAL_CASH,
            fee_rate: DEFAULT_FEE_RATE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PoolSection {
    /// Replace the pool with the single all-cash strategy.
    pub cash_only: bool,
    #[serde(flatten)]
    pub grid: PoolConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeetingsSection {
    pub sdm_window: usize,
    pub query_budget: usize,
    pub retrieve_k: usize,
    pub retries: usize,
    /// Fraction of net value a risk alert moves to cash.
    pub de_risk_step: f64,
    /// Directory with otto.xml, bob.xml, dave.xml and emily.xml; the shipped team if unset.
    pub profiles_dir: Option<PathBuf>,
}

impl Default for MeetingsSection {
    fn default() -> Self {
        MeetingsSection {
            sdm_window: 60,
            query_budget: DEFAULT_QUERY_BUDGET,
            retrieve_k: RETRIEVE_K,
            retries: DEFAULT_RETRIES,
            de_risk_step: 0.2,
            profiles_dir: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Scripted,
    Http,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSection {
    pub kind: BackendKind,
    pub http: HttpConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    #[serde(default)]
    pub account: AccountSection,
    #[serde(default)]
    pub pool: PoolSection,
    #[serde(default)]
    pub risk: RiskConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub meetings: MeetingsSection,
    #[serde(default)]
    pub backend: BackendSection,
    pub seed: Option<u64>,
    /// Artifact directory. Not part of the config hash.
    #[serde(skip_serializing)]
    pub output: PathBuf,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

fn check(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(invalid(format!("config: {msg}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| invalid(format!("{}: {e}", origin.display())))
    }

    /// Reads the file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::parse(&text, path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data.dir);
        fix(&mut self.output);
        if let Some(p) = self.meetings.profiles_dir.as_mut() {
            fix(p);
        }
    }

    /// Domain checks that need no data.
    pub fn validate(&self) -> Result<()> {
        let a = &self.account;
        check(a.initial_capital.is_finite() && a.initial_capital > 0.0, "account.initial_capital must be positive")?;
        check((0.0..0.05).contains(&a.fee_rate), "account.fee_rate must be in [0, 0.05)")?;
        let r = &self.risk;
        validate_weights(&r.weights).map_err(|e| invalid(format!("config: risk.weights: {e}")))?;
        check(r.trigger > 0.0 && r.trigger <= 1.0, "risk.trigger must be in (0, 1]")?;
        check(r.rearm_below >= 0.0 && r.rearm_below < r.trigger, "risk.rearm_below must be in [0, trigger)")?;
        check(r.beta_window >= 2 && r.sigma_window >= 2, "risk windows need at least 2 sessions")?;
        check(r.participation > 0.0 && r.participation <= 1.0, "risk.participation must be in (0, 1]")?;
        check(r.shocks.iter().all(|s| *s > -1.0 && *s <= 0.0), "risk.shocks must be in (-1, 0]")?;
        check(r.beta_cap > 0.0 && r.lr_floor > 0.0 && r.sigma_ref_multiple > 0.0, "risk saturation points must be positive")?;
        self.policy.validate().map_err(|e| invalid(format!("config: policy: {e}")))?;
        let m = &self.meetings;
        check(m.sdm_window >= 5, "meetings.sdm_window must be at least 5")?;
        check(m.retrieve_k >= 1, "meetings.retrieve_k must be at least 1")?;
        check(m.query_budget >= 64, "meetings.query_budget must be at least 64")?;
        check(m.de_risk_step > 0.0 && m.de_risk_step <= 1.0, "meetings.de_risk_step must be in (0, 1]")?;
        match self.backend.kind {
            BackendKind::Scripted => check(self.seed.is_some(), "seed is required with the scripted backend")?,
            BackendKind::Http => {
                let h = &self.backend.http;
                check(!h.endpoint.is_empty(), "backend.http.endpoint is empty")?;
                check((0.0..=2.0).contains(&h.temperature), "backend.http.temperature must be in [0, 2]")?;
                check(h.timeout_secs > 0, "backend.http.timeout_secs must be positive")?;
            }
        }
        if let (Some(s), Some(e)) = (self.data.start, self.data.end) {
            check(s <= e, "data.start is after data.end")?;
        }
        Ok(())
    }

    /// Checks the date range and universe against a loaded dataset.
    pub fn validate_against(&self, data: &Dataset) -> Result<()> {
        let cal = data.calendar();
        for (name, d) in [("start", self.data.start), ("end", self.data.end)] {
            if let Some(d) = d {
                check(
                    d >= cal.first() && d <= cal.last(),
                    &format!("data.{name} {d} is outside the dataset ({} to {})", cal.first(), cal.last()),
                )?;
            }
        }
        let symbols = data.symbols();
        for s in &self.data.universe {
            check(symbols.contains(s), &format!("universe symbol {s} is not in the dataset"))?;
        }
        Ok(())
    }

    pub fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            sim: SimConfig {
                fee_rate: self.account.fee_rate,
                initial_cash: self.account.initial_capital,
            },
            risk: self.risk.clone(),
            policy: self.policy.clone(),
            sdm_window: self.meetings.sdm_window,
            de_risk: DeRiskConfig {
                cash_step: self.meetings.de_risk_step,
                retries: self.meetings.retries,
                ..DeRiskConfig::default()
            },
            query_budget: self.meetings.query_budget,
            retrieve_k: self.meetings.retrieve_k,
            retries: self.meetings.retries,
        }
    }

    /// Canonical JSON of everything that shapes the run (the output directory excluded).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
