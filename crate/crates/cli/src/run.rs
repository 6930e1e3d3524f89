//! `fundsim run`: load, validate, walk forward, write artifacts and the manifest.

use std::collections::BTreeMap;
use std::sync::Arc;

use fundsim_core::agents::{shipped_profiles, ChatBackend, Embedder, HttpBackend, LlmSentiment, ScriptedBackend, StubEmbedder, Team};
use fundsim_core::marketdata::{Dataset, SectorSet};
use fundsim_core::meetings::{Engine, Room, RunOutput};
use fundsim_core::risk::{LexiconSentiment, SentimentProvider};
use fundsim_core::strategy::{generate_pool, Strategy, StrategyKind, StrategyPool};
use tracing::{info, warn};

use crate::artifacts::{self, Failure, Manifest};
use crate::config::{BackendKind, RunConfig};
use crate::{CliError, Result};

#[derive(Debug)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub output: RunOutput,
}

pub fn build_pool(cfg: &RunConfig) -> Result<StrategyPool> {
    if cfg.pool.cash_only {
        let cash = Strategy::new(StrategyKind::Cash).map_err(|e| CliError::Invalid(e.to_string()))?;
        return Ok(StrategyPool {
            strategies: vec![cash],
            config: cfg.pool.grid.clone(),
            warnings: vec![],
        });
    }
    let pool = generate_pool(&cfg.pool.grid).map_err(|e| CliError::Invalid(format!("config: pool: {e}")))?;
    for w in &pool.warnings {
        warn!("{w}");
    }
    Ok(pool)
}

fn load_team(cfg: &RunConfig) -> Result<Team> {
    match &cfg.meetings.profiles_dir {
        Some(dir) => Team::load_dir(dir).map_err(|e| CliError::Invalid(e.to_string())),
        None => Ok(shipped_profiles()),
    }
}

/// Runs the configured walk-forward. On an engine failure the artifacts of the days
/// completed so far are still written and the manifest records where it stopped.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let data = Dataset::load_dir(&cfg.data.dir, &SectorSet::default()).map_err(|e| CliError::Invalid(e.to_string()))?;
    cfg.validate_against(&data)?;
    let team = load_team(cfg)?;
    let pool = build_pool(cfg)?;

    let http = match cfg.backend.kind {
        BackendKind::Http => Some(Arc::new(HttpBackend::new(cfg.backend.http.clone()))),
        BackendKind::Scripted => None,
    };
    let scripted = ScriptedBackend::new(cfg.seed.unwrap_or_default());
    let backend: &dyn ChatBackend = match &http {
        Some(h) => h.as_ref(),
        None => &scripted,
    };
    let embedder: &dyn Embedder = match &http {
        Some(h) if h.config.embedding_endpoint.is_some() => h.as_ref(),
        _ => &StubEmbedder,
    };
    let llm_sentiment = http.as_ref().map(|h| LlmSentiment {
        backend: h.clone(),
        analyst: team.market.clone(),
        fallback: LexiconSentiment::default(),
    });
    let lexicon = LexiconSentiment::default();
    let sentiment: &dyn SentimentProvider = match &llm_sentiment {
        Some(s) => s,
        None => &lexicon,
    };

    let universe = if cfg.data.universe.is_empty() { data.symbols() } else { cfg.data.universe.clone() };
    let room = Room {
        team: &team,
        backend,
        embedder,
    };
    let mut engine = Engine::new(data.clone(), Some(universe.clone()), cfg.engine_config(), pool, room, sentiment)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let cal = data.calendar();
    let start = match cfg.data.start {
        Some(s) => s,
        None => *cal
            .days()
            .get(engine.required_history())
            .ok_or_else(|| CliError::Invalid("dataset is too short for the strategy meeting window".into()))?,
    };
    let end = cfg.data.end.unwrap_or(cal.last());
    let days = engine.schedule(start, end).map_err(|e| CliError::Invalid(e.to_string()))?;
    info!(start = %days[0], end = %days[days.len() - 1], days = days.len(), backend = %backend.describe(), "walk-forward");

    let mut failure = None;
    for d in &days {
        if let Err(e) = engine.run_trading_day(*d) {
            failure = Some(Failure {
                date: Some(*d),
                error: e.to_string(),
            });
            break;
        }
    }
    let output = engine.output();
    std::fs::create_dir_all(&cfg.output).map_err(|e| CliError::io(&cfg.output, e))?;
    let hashes = artifacts::write_run(&cfg.output, &universe, &output)?;
    let mut meetings = BTreeMap::new();
    for m in &output.meetings {
        *meetings.entry(m.kind.code().to_string()).or_insert(0) += 1;
    }
    let config_json = cfg.canonical_json();
    let manifest = Manifest {
        fundsim_version: env!("CARGO_PKG_VERSION").into(),
        status: if failure.is_some() { "failed" } else { "complete" }.into(),
        failure: failure.clone(),
        seed: cfg.seed,
        backend: backend.describe(),
        config_sha256: artifacts::sha256_hex(config_json.as_bytes()),
        data_sha256: artifacts::hash_tree(&cfg.data.dir)?,
        start: output.days.first().map(|d| d.date),
        end: output.days.last().map(|d| d.date),
        trading_days: output.days.len(),
        meetings,
        artifacts: hashes,
        config: serde_json::from_str(&config_json).expect("config json"),
    };
    artifacts::write_json(&cfg.output.join(artifacts::MANIFEST), &manifest)?;
    if let Some(f) = failure {
        return Err(CliError::Engine(format!(
            "{} (on {}); partial artifacts in {}",
            f.error,
            f.date.map_or("-".into(), |d| d.to_string()),
            cfg.output.display()
        )));
    }
    Ok(RunSummary { manifest, output })
}
