use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{
    run_market_analysis, run_risk_alert, run_strategy_development, DeRiskConfig, MeetingError, MeetingRecord, Result,
    Room, SdmParams,
};
use crate::agents::{
    decide_action, record_reflection, risk_adjusted_reward, score_policies, summarize_query, CandidateRewards,
    DecisionContext, MemoryBank, PolicyConfig, PolicyState, QueryInputs, StoreKind, DEFAULT_QUERY_BUDGET,
    DEFAULT_RETRIES, RETRIEVE_K,
};
use crate::marketdata::{Dataset, MarketView};
use crate::metrics::{MetricsReport, PERIODS_PER_YEAR};
use crate::portfolio::{Account, Action, Fill};
use crate::risk::{assess, RamGate, RiskConfig, SentimentProvider};
use crate::strategy::{simulate, BacktestResult, SimConfig, Strategy, StrategyKind, StrategyPool, WeightCache};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub sim: SimConfig,
    pub risk: RiskConfig,
    pub policy: PolicyConfig,
    /// Trailing sessions the strategy meeting simulates over.
    pub sdm_window: usize,
    pub de_risk: DeRiskConfig,
    pub query_budget: usize,
    pub retrieve_k: usize,
    pub retries: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            sim: SimConfig::default(),
            risk: RiskConfig::default(),
            policy: PolicyConfig::default(),
            sdm_window: 60,
            de_risk: DeRiskConfig::default(),
            query_budget: DEFAULT_QUERY_BUDGET,
            retrieve_k: RETRIEVE_K,
            retries: DEFAULT_RETRIES,
        }
    }
}

/// End-of-day state of the book.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayRecord {
    pub date: NaiveDate,
    pub net_value: f64,
    pub cash: f64,
    pub weights: BTreeMap<String, f64>,
    pub r_score: f64,
    pub risk_alert: bool,
    pub fills: usize,
}

/// Otto's weekly decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionLog {
    pub date: NaiveDate,
    pub strategy: String,
    pub ranking: Vec<(String, f64)>,
    pub reward_weights: (f64, f64),
    pub action: Action,
    pub attempts: usize,
    pub fallback: bool,
    pub audit: Vec<String>,
}

#[derive(Debug, Clone)]
struct Pending {
    decided: NaiveDate,
    query: String,
    action: Action,
}

#[derive(Debug, Clone)]
pub struct EngineState {
    pub account: Account,
    pub bank: MemoryBank,
    pub policy: PolicyState,
    /// Risk-adjusted realized weekly rewards, by the strategy that earned them.
    pub real_rewards: BTreeMap<String, Vec<f64>>,
    pub meetings: Vec<MeetingRecord>,
    pub days: Vec<DayRecord>,
    pub decisions: Vec<DecisionLog>,
    /// Non-fatal problems: failed meetings, rejected trades.
    pub audit: Vec<String>,
    gate: RamGate,
    day_index: usize,
    trade: Option<Pending>,
    reflection: Option<Pending>,
    last_week_value: Option<f64>,
    week_risk: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub days: Vec<DayRecord>,
    pub meetings: Vec<MeetingRecord>,
    pub decisions: Vec<DecisionLog>,
    pub ledger: Vec<Fill>,
    pub metrics: MetricsReport,
    pub audit: Vec<String>,
}

/// The walk-forward loop: one call per trading day, in calendar order.
pub struct Engine<'a> {
    data: Dataset,
    universe: Vec<String>,
    config: EngineConfig,
    room: Room<'a>,
    sentiment: &'a dyn SentimentProvider,
    pool: StrategyPool,
    strategies: BTreeMap<String, Strategy>,
    cache: WeightCache,
    pub state: EngineState,
}

/// Compounded return of each ISO week, from the last value of the previous week (the first
/// value for the first week) to the week's last value.
pub(crate) fn weekly_returns(dates: &[NaiveDate], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let Some(&first) = values.first() else {
        return out;
    };
    let mut base = first;
    for i in 0..dates.len() {
        let week_ends = i + 1 == dates.len() || dates[i + 1].iso_week() != dates[i].iso_week();
        if week_ends && i > 0 {
            out.push(values[i] / base - 1.0);
            base = values[i];
        }
    }
    out
}

impl<'a> Engine<'a> {
    /// Starts from cash with the all-cash strategy deployed.
    pub fn new(
        data: Dataset,
        universe: Option<Vec<String>>,
        config: EngineConfig,
        pool: StrategyPool,
        room: Room<'a>,
        sentiment: &'a dyn SentimentProvider,
    ) -> Result<Self> {
        config.policy.validate()?;
        if pool.is_empty() {
            return Err(MeetingError::Config("strategy pool is empty".into()));
        }
        let universe = universe.unwrap_or_else(|| data.symbols());
        let cash = Strategy::new(StrategyKind::Cash)?;
        let mut strategies: BTreeMap<String, Strategy> = pool.strategies.iter().map(|s| (s.id.clone(), s.clone())).collect();
        strategies.entry(cash.id.clone()).or_insert_with(|| cash.clone());
        let state = EngineState {
            account: Account::new(config.sim.initial_cash, config.sim.fee_rate),
            bank: MemoryBank::new(),
            policy: PolicyState::new(&cash.id, config.policy.clone())?,
            real_rewards: BTreeMap::new(),
            meetings: Vec::new(),
            days: Vec::new(),
            decisions: Vec::new(),
            audit: Vec::new(),
            gate: RamGate::default(),
            day_index: 0,
            trade: None,
            reflection: None,
            last_week_value: None,
            week_risk: Vec::new(),
        };
        Ok(Engine {
            data,
            universe,
            config,
            room,
            sentiment,
            pool,
            strategies,
            cache: WeightCache::new(),
            state,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Sessions of history needed before the first simulated day.
    pub fn required_history(&self) -> usize {
        let lookback = self.strategies.values().map(Strategy::lookback).max().unwrap_or(0);
        self.config.sdm_window.max(lookback.saturating_sub(1)).max(1)
    }

    fn view(&self, date: NaiveDate) -> Result<MarketView> {
        Ok(self.data.view_with_universe(date, self.universe.clone())?)
    }

    /// Stops, then yesterday's decision filled at today's close, then mark, risk check (and
    /// alert), and on the week's last session the market and strategy meetings, policy
    /// scoring and Otto's decision for the next session.
    pub fn run_trading_day(&mut self, date: NaiveDate) -> Result<&DayRecord> {
        let view = self.view(date)?;
        let st = &mut self.state;
        let mut fills = st.account.process_stops(&view);
        if let Some(p) = st.trade.take() {
            match st.account.apply_action(&p.action, &view, &format!("decision of {}", p.decided)) {
                Ok(f) => fills.extend(f),
                Err(e) => st.audit.push(format!("{date}: trade decided on {} rejected: {e}", p.decided)),
            }
        }
        st.account.mark(&view)?;
        let report = assess(&st.account, &view, &self.config.risk, self.sentiment)?;
        st.week_risk.push((report.r_score, report.eta, report.tau));
        let mut alert = false;
        if st.gate.check(report.r_score, st.day_index, &self.config.risk) {
            match run_risk_alert(self.room, &view, &mut st.account, &report, &self.config.risk, &self.config.de_risk) {
                Ok(o) => {
                    fills.extend(o.fills);
                    st.meetings.push(o.record);
                    alert = true;
                }
                Err(e) => st.audit.push(format!("{date}: risk alert failed: {e}")),
            }
        }
        if view.cursor_is_week_end() {
            self.week_end(&view)?;
        }
        let st = &mut self.state;
        let mark = st.account.mark(&view)?;
        st.day_index += 1;
        st.days.push(DayRecord {
            date,
            net_value: mark.net_value,
            cash: st.account.cash,
            weights: mark.weights,
            r_score: report.r_score,
            risk_alert: alert,
            fills: fills.len(),
        });
        Ok(st.days.last().expect("just pushed"))
    }

    fn incumbent_result(&self, view: &MarketView, start: NaiveDate, results: &[BacktestResult]) -> Result<BacktestResult> {
        let active = &self.state.policy.active;
        if let Some(r) = results.iter().find(|r| &r.strategy_id == active) {
            return Ok(r.clone());
        }
        let s = &self.strategies[active];
        Ok(simulate(s, view, start, view.cursor(), &self.config.sim, Some(&self.cache))?)
    }

    fn week_end(&mut self, view: &MarketView) -> Result<()> {
        let date = view.cursor();
        let value = self.state.account.mark(view)?.net_value;
        let r_real = self.state.last_week_value.map(|p| value / p - 1.0);
        if let (Some(p), Some(r)) = (self.state.reflection.take(), r_real) {
            record_reflection(
                &mut self.state.bank,
                self.room.embedder,
                p.decided,
                date,
                &p.query,
                &p.action,
                r,
            )?;
        }

        let mam = run_market_analysis(
            self.room,
            view,
            &self.state.account,
            &self.config.risk,
            self.sentiment,
            &mut self.state.bank,
            self.config.query_budget,
        );
        let (query, report) = match mam {
            Ok(o) => {
                let text = o.record.memory_writes.first().and_then(|id| self.state.bank.get(*id)).map(|r| r.text.clone());
                self.state.meetings.push(o.record);
                (o.query, text)
            }
            Err(e) => {
                self.state.audit.push(format!("{date}: market analysis failed: {e}"));
                (summarize_query(&QueryInputs::from_view(view, 5), self.config.query_budget), None)
            }
        };

        let params = SdmParams {
            window: self.config.sdm_window,
            top_m: self.config.policy.top_m,
            sim: self.config.sim,
        };
        let sdm = run_strategy_development(
            self.room,
            view,
            &self.pool,
            &params,
            Some(&self.cache),
            &mut self.state.bank,
            report.as_deref(),
        );
        let (candidates, results) = match sdm {
            Ok(o) => {
                self.state.meetings.push(o.record);
                (o.candidates, o.results)
            }
            Err(e) => {
                self.state.audit.push(format!("{date}: strategy development failed: {e}"));
                (Vec::new(), Vec::new())
            }
        };

        let mut ranking = Vec::new();
        if !results.is_empty() {
            let days = view.calendar();
            let start = days[days.len() - 1 - params.window];
            let incumbent = self.incumbent_result(view, start, &results)?;
            let active = self.state.policy.active.clone();
            if let Some(r) = r_real {
                let n = self.state.week_risk.len().max(1) as f64;
                let (rs, eta, tau) = self
                    .state
                    .week_risk
                    .iter()
                    .fold((0.0, 0.0, 0.0), |a, x| (a.0 + x.0, a.1 + x.1, a.2 + x.2));
                let mix = self.config.policy.risk_mix;
                let adjusted = risk_adjusted_reward(r, rs / n, eta / n, tau / n, self.config.policy.lambda, &mix)?;
                let sim_last = weekly_returns(&incumbent.dates, &incumbent.net_value).last().copied().unwrap_or(0.0);
                self.state.policy.record(sim_last, adjusted)?;
                self.state.real_rewards.entry(active.clone()).or_default().push(adjusted);
            }
            let mut ids = candidates.clone();
            if !ids.contains(&active) {
                ids.push(active.clone());
            }
            let by_id: BTreeMap<&str, &BacktestResult> = results
                .iter()
                .chain(std::iter::once(&incumbent))
                .map(|r| (r.strategy_id.as_str(), r))
                .collect();
            let rewards: Vec<CandidateRewards> = ids
                .iter()
                .map(|id| {
                    let r = by_id[id.as_str()];
                    let sim = weekly_returns(&r.dates, &r.net_value);
                    // realized history over the same horizon as the simulation
                    let real = self.state.real_rewards.get(id).map_or(Vec::new(), |v| {
                        v[v.len().saturating_sub(sim.len())..].to_vec()
                    });
                    CandidateRewards { id: id.clone(), sim, real }
                })
                .collect();
            let ranked = score_policies(&rewards, self.config.policy.gamma, self.state.policy.weights, Some(&active))?;
            self.state.policy.active = ranked.selected.clone();
            self.state.policy.candidates = candidates;
            ranking = ranked.scores;
        }

        let selected = self.state.policy.active.clone();
        let target = self.cache.get_or_compute(&self.strategies[&selected], view)?;
        let proposal = Action::Rebalance { weights: target.weights };
        let memories = self.state.bank.retrieve_text(
            self.room.embedder,
            &query,
            &StoreKind::ALL,
            self.config.retrieve_k,
        )?;
        let top: Vec<String> = ranking.iter().take(5).map(|(id, s)| format!("{id} ({s:+.6})")).collect();
        let options = format!(
            "deploy strategy {selected}; candidate scores: {}",
            if top.is_empty() { "not scored this week".to_string() } else { top.join(", ") }
        );
        let decision = decide_action(
            &self.room.team.manager,
            &DecisionContext {
                query: &query,
                memories: &memories,
                options,
                proposal: Some(&proposal),
                retries: self.config.retries,
            },
            self.room.backend,
        )?;
        let st = &mut self.state;
        if decision.action != Action::Hold {
            st.trade = Some(Pending {
                decided: date,
                query: query.clone(),
                action: decision.action.clone(),
            });
        }
        st.reflection = Some(Pending {
            decided: date,
            query,
            action: decision.action.clone(),
        });
        st.decisions.push(DecisionLog {
            date,
            strategy: selected,
            ranking,
            reward_weights: st.policy.weights,
            action: decision.action,
            attempts: decision.attempts,
            fallback: decision.fallback,
            audit: decision.audit,
        });
        st.last_week_value = Some(value);
        st.week_risk.clear();
        Ok(())
    }

    /// Trading days in `[start, end]`, checked to leave enough history before the first.
    pub fn schedule(&self, start: NaiveDate, end: NaiveDate) -> Result<Vec<NaiveDate>> {
        let cal = self.data.calendar();
        let days: Vec<NaiveDate> = cal.days().iter().copied().filter(|d| *d >= start && *d <= end).collect();
        let Some(first) = days.first() else {
            return Err(MeetingError::Config(format!("no trading days between {start} and {end}")));
        };
        let idx = cal.index_of(*first).expect("day from the calendar");
        let need = self.required_history();
        if idx < need {
            return Err(MeetingError::Config(format!(
                "run starts at {first} with {idx} sessions of history; at least {need} are needed (first valid start {})",
                cal.days().get(need).map_or("none".to_string(), |d| d.to_string())
            )));
        }
        Ok(days)
    }

    /// Runs every trading day in `[start, end]`.
    pub fn run(&mut self, start: NaiveDate, end: NaiveDate) -> Result<RunOutput> {
        for d in self.schedule(start, end)? {
            self.run_trading_day(d)?;
        }
        Ok(self.output())
    }

    pub fn output(&self) -> RunOutput {
        let st = &self.state;
        let values: Vec<f64> = st.days.iter().map(|d| d.net_value).collect();
        let simplexes: Vec<Vec<f64>> = st
            .days
            .iter()
            .map(|d| {
                let mut v: Vec<f64> = self.universe.iter().map(|s| d.weights.get(s).copied().unwrap_or(0.0)).collect();
                v.push(if d.net_value > 0.0 { d.cash / d.net_value } else { 1.0 });
                v
            })
            .collect();
        RunOutput {
            days: st.days.clone(),
            meetings: st.meetings.clone(),
            decisions: st.decisions.clone(),
            ledger: st.account.ledger.clone(),
            metrics: MetricsReport::compute(&values, &simplexes, 0.0, PERIODS_PER_YEAR),
            audit: st.audit.clone(),
        }
    }
}
