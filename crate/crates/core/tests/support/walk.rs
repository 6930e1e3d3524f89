//! Walk-forward fixtures: a synthetic market, the shipped team and the scripted backend.

use chrono::NaiveDate;
use fundsim_core::agents::{shipped_profiles, ScriptedBackend, StubEmbedder, Team};
use fundsim_core::marketdata::Dataset;
use fundsim_core::meetings::{Engine, EngineConfig, MeetingRecord, Room, RunOutput};
use fundsim_core::risk::LexiconSentiment;
use fundsim_core::strategy::{generate_pool, PoolConfig, StrategyPool};
use fundsim_core::synth::{self, SynthConfig};

pub fn market(symbols: usize, days: usize, seed: u64) -> Dataset {
    synth::generate(&SynthConfig {
        symbols,
        days,
        seed,
        ..SynthConfig::default()
    })
    .into_dataset()
    .unwrap()
}

/// Four indicator rules plus the classical three; enough to exercise selection quickly.
pub fn small_pool() -> StrategyPool {
    generate_pool(&PoolConfig {
        indicators: ["SMA(n=20)", "RSI(n=14)"].iter().map(|s| s.parse().unwrap()).collect(),
        top_k: vec![3, 5],
        ..PoolConfig::default()
    })
    .unwrap()
}

pub struct Fixture {
    pub team: Team,
    pub backend: ScriptedBackend,
    pub embedder: StubEmbedder,
    pub sentiment: LexiconSentiment,
}

impl Fixture {
    pub fn new() -> Self {
        Fixture {
            team: shipped_profiles(),
            backend: ScriptedBackend::new(7),
            embedder: StubEmbedder,
            sentiment: LexiconSentiment::default(),
        }
    }

    pub fn engine(&self, data: &Dataset, pool: &StrategyPool, config: EngineConfig) -> Engine<'_> {
        let room = Room {
            team: &self.team,
            backend: &self.backend,
            embedder: &self.embedder,
        };
        Engine::new(data.clone(), None, config, pool.clone(), room, &self.sentiment).unwrap()
    }
}

/// First valid start and the last day of the calendar.
pub fn span(data: &Dataset, engine: &Engine<'_>) -> (NaiveDate, NaiveDate) {
    let days = data.calendar().days();
    (days[engine.required_history()], *days.last().unwrap())
}

pub fn full_run(data: &Dataset, pool: &StrategyPool, config: EngineConfig) -> RunOutput {
    let fx = Fixture::new();
    let mut engine = fx.engine(data, pool, config);
    let (start, end) = span(data, &engine);
    engine.run(start, end).unwrap()
}

/// Runs up to `cursor` and returns the meeting transcripts produced.
pub fn transcripts_until(data: &Dataset, pool: &StrategyPool, config: EngineConfig, cursor: NaiveDate) -> Vec<MeetingRecord> {
    let fx = Fixture::new();
    let mut engine = fx.engine(data, pool, config);
    let (start, _) = span(data, &engine);
    engine.run(start, cursor).unwrap().meetings
}

/// Runs once on the original market, then for each cursor on a copy scrambled after that
/// cursor, and reports every transcript or book record at or before the cursor that differs.
pub fn transcript_violations(
    data: &Dataset,
    pool: &StrategyPool,
    config: &EngineConfig,
    cursors: &[NaiveDate],
    seed: u64,
) -> Vec<String> {
    use rayon::prelude::*;
    let fx = Fixture::new();
    let mut engine = fx.engine(data, pool, config.clone());
    let (start, end) = span(data, &engine);
    let base = engine.run(start, end).unwrap();
    cursors
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, &cursor)| {
            let scrambled = super::lookahead::perturb_after(data, cursor, seed.wrapping_add(i as u64));
            let fx = Fixture::new();
            let mut engine = fx.engine(&scrambled, pool, config.clone());
            let out = engine.run(start, cursor).unwrap();
            let mut bad = Vec::new();
            let before: Vec<&MeetingRecord> = base.meetings.iter().filter(|m| m.date <= cursor).collect();
            if before.len() != out.meetings.len() {
                bad.push(format!("{cursor}: {} meetings vs {}", out.meetings.len(), before.len()));
            }
            for (a, b) in before.iter().zip(&out.meetings) {
                if json(*a) != json(b) {
                    bad.push(format!("{cursor}: {} {} transcript differs", a.date, a.kind));
                }
            }
            for (a, b) in base.days.iter().zip(&out.days) {
                if json(a) != json(b) {
                    bad.push(format!("{cursor}: book on {} differs", a.date));
                }
            }
            bad
        })
        .collect()
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap()
}
