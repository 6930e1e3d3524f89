//! The three meeting protocols and the daily engine loop.
//!
//! Market analysis (Emily, Bob, Dave) and strategy development (Bob, Dave, Emily) run on
//! the last trading day of each week; a risk alert (Dave, Bob, Emily) runs when the risk
//! score fires. Otto closes every meeting with a synthesis.

mod analysis;
mod engine;

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::agents::{
    decide_action, summarize_query, AgentError, AgentProfile, BackendError, ChatBackend, ChatRequest, Decision,
    DecisionContext, Embedder, MemoryBank, QueryInputs, StoreKind, Team, TemplateKind,
};
use crate::indicators::IndicatorError;
use crate::marketdata::{DataError, MarketView};
use crate::portfolio::{Account, Action, ComplianceCaps, Fill, PortfolioError};
use crate::risk::{assess, should_trigger_ram, RiskConfig, RiskError, RiskReport, SentimentProvider};
use crate::strategy::{
    evaluate_pool, select_candidates, BacktestResult, SimConfig, StrategyError, StrategyPool, WeightCache,
};

pub use analysis::{market_overview, trend_summary};
pub use engine::{DayRecord, DecisionLog, Engine, EngineConfig, EngineState, RunOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MeetingKind {
    #[serde(rename = "MAM")]
    MarketAnalysis,
    #[serde(rename = "SDM")]
    StrategyDevelopment,
    #[serde(rename = "RAM")]
    RiskAlert,
}

impl MeetingKind {
    pub fn code(self) -> &'static str {
        match self {
            MeetingKind::MarketAnalysis => "MAM",
            MeetingKind::StrategyDevelopment => "SDM",
            MeetingKind::RiskAlert => "RAM",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            MeetingKind::MarketAnalysis => "Market Analysis Meeting",
            MeetingKind::StrategyDevelopment => "Strategy Development Meeting",
            MeetingKind::RiskAlert => "Risk Alert Meeting",
        }
    }

    /// Names of the contributing analysts, in speaking order.
    pub fn order(self) -> [&'static str; 3] {
        match self {
            MeetingKind::MarketAnalysis => ["Emily", "Bob", "Dave"],
            MeetingKind::StrategyDevelopment => ["Bob", "Dave", "Emily"],
            MeetingKind::RiskAlert => ["Dave", "Bob", "Emily"],
        }
    }
}

impl fmt::Display for MeetingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Error)]
pub enum MeetingError {
    #[error("{kind} runs on the last trading day of a week; {date} is not")]
    NotWeekEnd { kind: MeetingKind, date: NaiveDate },
    #[error("meeting skipped: {0}")]
    Skipped(String),
    #[error("{kind} aborted, {agent} got no reply: {source}")]
    Backend {
        kind: MeetingKind,
        agent: String,
        #[source]
        source: BackendError,
    },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Portfolio(#[from] PortfolioError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
}

pub type Result<T> = std::result::Result<T, MeetingError>;

/// One analyst's section of a meeting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub agent: String,
    pub section: String,
    /// The model's reply.
    pub text: String,
    /// The figures the analyst worked from.
    pub payload: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Synthesis {
    pub agent: String,
    pub text: String,
    pub decision: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeetingRecord {
    pub kind: MeetingKind,
    pub date: NaiveDate,
    pub contributions: Vec<Contribution>,
    pub synthesis: Synthesis,
    pub memory_writes: Vec<u64>,
}

impl MeetingRecord {
    /// `YYYY-MM-DD-<kind>.json`.
    pub fn file_name(&self) -> String {
        format!("{}-{}.json", self.date, self.kind.code().to_ascii_lowercase())
    }

    /// Contributor names in order.
    pub fn speakers(&self) -> Vec<&str> {
        self.contributions.iter().map(|c| c.agent.as_str()).collect()
    }
}

/// The participants and services a meeting needs.
#[derive(Clone, Copy)]
pub struct Room<'a> {
    pub team: &'a Team,
    pub backend: &'a dyn ChatBackend,
    pub embedder: &'a dyn Embedder,
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

impl Room<'_> {
    fn ask(
        &self,
        kind: MeetingKind,
        agent: &AgentProfile,
        template: TemplateKind,
        mut values: BTreeMap<&str, String>,
    ) -> Result<String> {
        values.insert("profile", agent.name.clone());
        values.insert("role", agent.role_phrase());
        let prompt = template.template().render(&values)?;
        self.backend
            .complete(&ChatRequest {
                task: template.task(),
                system: agent.description.clone(),
                prompt,
            })
            .map_err(|source| MeetingError::Backend {
                kind,
                agent: agent.name.clone(),
                source,
            })
    }

    fn synthesize(&self, kind: MeetingKind, contributions: &[Contribution]) -> Result<Synthesis> {
        let otto = &self.team.manager;
        let digest = contributions
            .iter()
            .map(|c| format!("- {} ({}): {}", c.agent, c.section, c.text))
            .collect::<Vec<_>>()
            .join("\n");
        let values = BTreeMap::from([("meeting", kind.title().to_string()), ("contributions", digest)]);
        let text = self.ask(kind, otto, TemplateKind::ReportSynthesis, values)?;
        let decision = crate::agents::parse_json_object(&text).unwrap_or(Value::Null);
        Ok(Synthesis {
            agent: otto.name.clone(),
            text,
            decision,
        })
    }
}

/// What a market analysis meeting produces besides its record.
#[derive(Debug, Clone)]
pub struct MamOutcome {
    pub record: MeetingRecord,
    /// The day's summarized query.
    pub query: String,
    pub risk: RiskReport,
}

/// Market analysis: Emily's overview, Bob's trend section and Dave's risk section,
/// synthesized by Otto and stored as one report in M_R. Nothing is written unless every
/// reply arrives.
pub fn run_market_analysis(
    room: Room,
    view: &MarketView,
    acct: &Account,
    risk_cfg: &RiskConfig,
    sentiment: &dyn SentimentProvider,
    bank: &mut MemoryBank,
    query_budget: usize,
) -> Result<MamOutcome> {
    let kind = MeetingKind::MarketAnalysis;
    if !view.cursor_is_week_end() {
        return Err(MeetingError::NotWeekEnd {
            kind,
            date: view.cursor(),
        });
    }
    let team = room.team;
    let inputs = QueryInputs::from_view(view, 5);
    let query = summarize_query(&inputs, query_budget);
    let overview = market_overview(view)?;
    let movers = inputs
        .movers
        .iter()
        .map(|(s, r)| format!("{s} {:+.2}%", r * 100.0))
        .collect::<Vec<_>>()
        .join(", ");
    let headlines = query.split_once("Headlines").map_or(String::new(), |(_, h)| format!("Headlines{h}"));
    let emily = room.ask(
        kind,
        &team.market,
        TemplateKind::MarketAnalysis,
        BTreeMap::from([
            ("current_prices", if movers.is_empty() { "no price changes".into() } else { movers }),
            ("recent_news", headlines),
            ("tool_results", overview.to_string()),
        ]),
    )?;
    let trend = trend_summary(view, 20)?;
    let bob = room.ask(
        kind,
        &team.strategy,
        TemplateKind::StrategyDevelopment,
        BTreeMap::from([
            ("strategy_parameters", "a weekly cross-sectional trend review over 20 sessions".to_string()),
            ("simulation_data", trend.to_string()),
            ("performance_metrics", "trend strength and breadth".to_string()),
        ]),
    )?;
    let risk = assess(acct, view, risk_cfg, sentiment)?;
    let risk_payload = risk_indicators(&risk);
    let events = if should_trigger_ram(risk.r_score) {
        format!("risk score {:.3} above the alert threshold", risk.r_score)
    } else {
        "none flagged".to_string()
    };
    let dave = room.ask(
        kind,
        &team.risk,
        TemplateKind::RiskManagement,
        BTreeMap::from([("risk_indicators", risk_payload.to_string()), ("risk_events", events)]),
    )?;
    let contributions = vec![
        Contribution {
            agent: team.market.name.clone(),
            section: "market_overview".into(),
            text: emily,
            payload: json!({"query": query, "indicators": overview}),
        },
        Contribution {
            agent: team.strategy.name.clone(),
            section: "quantitative_analysis".into(),
            text: bob,
            payload: trend,
        },
        Contribution {
            agent: team.risk.name.clone(),
            section: "risk_analysis".into(),
            text: dave,
            payload: risk_payload,
        },
    ];
    let synthesis = room.synthesize(kind, &contributions)?;
    let text = format!("Market report {}\n{query}\nSynthesis: {}", view.cursor(), synthesis.text);
    let meta = BTreeMap::from([("meeting".to_string(), kind.code().to_string())]);
    let id = bank
        .insert(room.embedder, StoreKind::Report, view.cursor(), view.cursor(), text, meta)?
        .id;
    Ok(MamOutcome {
        record: MeetingRecord {
            kind,
            date: view.cursor(),
            contributions,
            synthesis,
            memory_writes: vec![id],
        },
        query,
        risk,
    })
}

fn risk_indicators(r: &RiskReport) -> Value {
    let top_sector = r
        .sector_exposure
        .iter()
        .max_by(|a, b| a.1.total_cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(s, w)| json!({"sector": s, "weight": round6(*w)}))
        .unwrap_or(Value::Null);
    json!({
        "beta": round6(r.beta_p),
        "liquidity_ratio": round6(r.liquidity_ratio),
        "max_sector": top_sector,
        "sigma": round6(r.sigma_p),
        "r_score": round6(r.r_score),
        "stress": round6(r.eta),
        "sentiment": round6(r.tau),
        "warm_up": r.warm_up,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SdmParams {
    /// Trailing sessions each pool member is simulated over.
    pub window: usize,
    pub top_m: usize,
    pub sim: SimConfig,
}

impl Default for SdmParams {
    fn default() -> Self {
        SdmParams {
            window: 60,
            top_m: 3,
            sim: SimConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdmOutcome {
    pub record: MeetingRecord,
    /// The selected candidates.
    pub candidates: Vec<String>,
    /// Backtests of the whole pool, in pool order.
    pub results: Vec<BacktestResult>,
}

fn metric(x: Option<f64>) -> Value {
    x.map_or(Value::Null, |v| json!(round6(v)))
}

/// Strategy development: Bob backtests the pool over the trailing window and keeps the
/// best `top_m`, Dave reviews their risk, Emily adds market commentary, Otto synthesizes
/// and the findings go into M_S.
pub fn run_strategy_development(
    room: Room,
    view: &MarketView,
    pool: &StrategyPool,
    params: &SdmParams,
    cache: Option<&WeightCache>,
    bank: &mut MemoryBank,
    market_report: Option<&str>,
) -> Result<SdmOutcome> {
    let kind = MeetingKind::StrategyDevelopment;
    if !view.cursor_is_week_end() {
        return Err(MeetingError::NotWeekEnd {
            kind,
            date: view.cursor(),
        });
    }
    if pool.is_empty() {
        return Err(MeetingError::Config("strategy pool is empty".into()));
    }
    let team = room.team;
    let days = view.calendar();
    if days.len() <= params.window {
        return Err(MeetingError::Skipped(format!(
            "{} sessions of history, the strategy window needs {}",
            days.len(),
            params.window + 1
        )));
    }
    let start = days[days.len() - 1 - params.window];
    let results = match evaluate_pool(pool, view, start, view.cursor(), &params.sim, cache) {
        Ok(r) => r,
        Err(StrategyError::InsufficientWindow { needed, days, .. }) => {
            return Err(MeetingError::Skipped(format!("window of {days} sessions, strategies need {needed}")))
        }
        Err(e) => return Err(e.into()),
    };
    let selection = select_candidates(pool, &results, params.top_m)?;
    let by_id: BTreeMap<&str, &BacktestResult> = results.iter().map(|r| (r.strategy_id.as_str(), r)).collect();
    let row = |id: &str| {
        let m = &by_id[id].metrics;
        json!({"id": id, "TR": metric(m.tr), "SR": metric(m.sr), "MDD": metric(m.mdd), "VOL": metric(m.vol)})
    };
    let table: Vec<Value> = selection.ids.iter().map(|id| row(id)).collect();
    let bob_payload = json!({
        "window": {"start": start, "end": view.cursor()},
        "pool_size": pool.len(),
        "selected": table,
    });
    let bob = room.ask(
        kind,
        &team.strategy,
        TemplateKind::StrategyDevelopment,
        BTreeMap::from([
            (
                "strategy_parameters",
                format!("a pool of {} strategies simulated from {start} to {}", pool.len(), view.cursor()),
            ),
            ("simulation_data", bob_payload.to_string()),
            ("performance_metrics", "Sharpe ratio and maximum drawdown".to_string()),
        ]),
    )?;
    let reviews: Vec<Value> = selection
        .ids
        .iter()
        .map(|id| {
            let r = by_id[id.as_str()];
            let worst = r.rewards.iter().copied().fold(0.0f64, f64::min);
            json!({
                "id": id,
                "MDD": metric(r.metrics.mdd),
                "VOL": metric(r.metrics.vol),
                "SoR": metric(r.metrics.sor),
                "worst_day": round6(worst),
            })
        })
        .collect();
    let dave_payload = json!({"candidates": reviews});
    let dave = room.ask(
        kind,
        &team.risk,
        TemplateKind::RiskManagement,
        BTreeMap::from([
            ("risk_indicators", dave_payload.to_string()),
            ("risk_events", "candidate drawdowns over the simulation window".to_string()),
        ]),
    )?;
    let commentary = match market_report {
        Some(r) => r.to_string(),
        None => summarize_query(&QueryInputs::from_view(view, 5), crate::agents::DEFAULT_QUERY_BUDGET),
    };
    let emily = room.ask(
        kind,
        &team.market,
        TemplateKind::MarketAnalysis,
        BTreeMap::from([
            ("current_prices", format!("the week ending {}", view.cursor())),
            ("recent_news", commentary.replace('\n', " | ")),
            ("tool_results", "the market context for the candidate strategies".to_string()),
        ]),
    )?;
    let contributions = vec![
        Contribution {
            agent: team.strategy.name.clone(),
            section: "simulated_trading".into(),
            text: bob,
            payload: bob_payload,
        },
        Contribution {
            agent: team.risk.name.clone(),
            section: "candidate_risk".into(),
            text: dave,
            payload: dave_payload,
        },
        Contribution {
            agent: team.market.name.clone(),
            section: "market_commentary".into(),
            text: emily,
            payload: json!({"report": commentary}),
        },
    ];
    let synthesis = room.synthesize(kind, &contributions)?;
    let text = format!(
        "Strategy review {}: candidates {}. Synthesis: {}",
        view.cursor(),
        selection.ids.join(", "),
        synthesis.text
    );
    let meta = BTreeMap::from([
        ("meeting".to_string(), kind.code().to_string()),
        ("candidates".to_string(), selection.ids.join(",")),
    ]);
    let id = bank
        .insert(room.embedder, StoreKind::Strategy, view.cursor(), view.cursor(), text, meta)?
        .id;
    Ok(SdmOutcome {
        record: MeetingRecord {
            kind,
            date: view.cursor(),
            contributions,
            synthesis,
            memory_writes: vec![id],
        },
        candidates: selection.ids,
        results,
    })
}

/// How a risk alert de-risks the book.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeRiskConfig {
    /// Cash raised, as a fraction of net value.
    pub cash_step: f64,
    pub caps: ComplianceCaps,
    pub retries: usize,
}

impl Default for DeRiskConfig {
    fn default() -> Self {
        DeRiskConfig {
            cash_step: 0.2,
            caps: ComplianceCaps::default(),
            retries: crate::agents::DEFAULT_RETRIES,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RamOutcome {
    pub record: MeetingRecord,
    pub decision: Decision,
    pub fills: Vec<Fill>,
}

/// Risk alert: Dave presents the risk report, Bob the stress severity, Emily the news
/// sentiment. Otto decides on the de-risking proposal (invested fraction lowered by
/// `cash_step`), which is applied at the cursor together with a compliance sell-down.
/// The account changes only if both steps succeed.
pub fn run_risk_alert(
    room: Room,
    view: &MarketView,
    acct: &mut Account,
    report: &RiskReport,
    risk_cfg: &RiskConfig,
    params: &DeRiskConfig,
) -> Result<RamOutcome> {
    let kind = MeetingKind::RiskAlert;
    if !should_trigger_ram(report.r_score) {
        return Err(MeetingError::Config(format!(
            "risk score {:.4} does not trigger an alert",
            report.r_score
        )));
    }
    let team = room.team;
    let dave_payload = risk_indicators(report);
    let dave = room.ask(
        kind,
        &team.risk,
        TemplateKind::RiskManagement,
        BTreeMap::from([
            ("risk_indicators", dave_payload.to_string()),
            ("risk_events", format!("risk score {:.3} above the alert threshold", report.r_score)),
        ]),
    )?;
    let bob_payload = json!({"shocks": risk_cfg.shocks, "stress_severity": round6(report.eta)});
    let bob = room.ask(
        kind,
        &team.strategy,
        TemplateKind::StrategyDevelopment,
        BTreeMap::from([
            ("strategy_parameters", "uniform price shocks on current holdings".to_string()),
            ("simulation_data", bob_payload.to_string()),
            ("performance_metrics", "worst-case loss".to_string()),
        ]),
    )?;
    let week_ago = view.calendar().iter().rev().nth(4).copied().unwrap_or(view.cursor());
    let headlines: Vec<String> = view.news_since(week_ago).iter().map(|n| n.headline.clone()).collect();
    let emily_payload = json!({"sentiment": round6(report.tau), "headlines": headlines.len()});
    let emily = room.ask(
        kind,
        &team.market,
        TemplateKind::MarketAnalysis,
        BTreeMap::from([
            ("current_prices", format!("positions marked at the {} close", view.cursor())),
            (
                "recent_news",
                if headlines.is_empty() { "no significant headlines".into() } else { headlines.join(" | ") },
            ),
            ("tool_results", emily_payload.to_string()),
        ]),
    )?;
    let contributions = vec![
        Contribution {
            agent: team.risk.name.clone(),
            section: "risk_report".into(),
            text: dave,
            payload: serde_json::to_value(report).expect("risk report serializes"),
        },
        Contribution {
            agent: team.strategy.name.clone(),
            section: "stress_test".into(),
            text: bob,
            payload: bob_payload,
        },
        Contribution {
            agent: team.market.name.clone(),
            section: "sentiment".into(),
            text: emily,
            payload: emily_payload,
        },
    ];
    let mark = acct.mark(view)?;
    let invested = if mark.net_value > 0.0 { mark.invested() } else { 0.0 };
    let proposal = Action::AdjustRiskExposure {
        invested: (invested - params.cash_step).clamp(0.0, 1.0),
    };
    let digest = contributions
        .iter()
        .map(|c| format!("{}: {}", c.section, c.payload))
        .collect::<Vec<_>>()
        .join("\n");
    let decision = decide_action(
        &team.manager,
        &DecisionContext {
            query: &digest,
            memories: &[],
            options: format!("reduce the invested fraction from {:.4} by {:.2}", invested, params.cash_step),
            proposal: Some(&proposal),
            retries: params.retries,
        },
        room.backend,
    )?;
    let mut scratch = acct.clone();
    let mut fills = scratch.apply_action(&decision.action, view, "risk alert")?;
    fills.extend(scratch.apply_action(&Action::EnforceCompliance { caps: params.caps }, view, "risk alert compliance")?);
    *acct = scratch;
    let synthesis = Synthesis {
        agent: team.manager.name.clone(),
        text: decision.replies.last().cloned().unwrap_or_default(),
        decision: json!({
            "action": decision.action,
            "compliance": Action::EnforceCompliance { caps: params.caps },
            "fallback": decision.fallback,
            "audit": decision.audit,
        }),
    };
    Ok(RamOutcome {
        record: MeetingRecord {
            kind,
            date: view.cursor(),
            contributions,
            synthesis,
            memory_writes: Vec::new(),
        },
        decision,
        fills,
    })
}
