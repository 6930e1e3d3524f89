mod support;

use std::path::PathBuf;
use std::time::Instant;

use chrono::Datelike;
use fundsim_core::agents::{shipped_profiles, BackendError, MemoryBank, ScriptedBackend, SequenceBackend, StubEmbedder};
use fundsim_core::meetings::{
    run_market_analysis, run_risk_alert, DeRiskConfig, EngineConfig, MeetingError, MeetingKind, MeetingRecord, Room,
};
use fundsim_core::portfolio::{Account, Action};
use fundsim_core::risk::{assess, LexiconSentiment, RiskConfig};
use fundsim_core::strategy::{generate_pool, PoolConfig};
use support::walk;

fn golden(name: &str, record: &MeetingRecord) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/meetings").join(name);
    let text = serde_json::to_string_pretty(record).unwrap() + "\n";
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {}", path.display()));
    assert_eq!(text, want, "{name} drifted; rerun with UPDATE_GOLDEN=1 if intended");
}

#[test]
fn weekly_cadence_and_repeatable_runs() {
    let data = walk::market(20, 504, 20_240_101);
    let pool = generate_pool(&PoolConfig::default()).unwrap();
    let t = Instant::now();
    let first = walk::full_run(&data, &pool, EngineConfig::default());
    eprintln!("full run: {:?}, {} days", t.elapsed(), first.days.len());
    let second = walk::full_run(&data, &pool, EngineConfig::default());
    assert_eq!(serde_json::to_string(&first).unwrap(), serde_json::to_string(&second).unwrap());

    let week_ends = first
        .days
        .iter()
        .enumerate()
        .filter(|(i, d)| first.days.get(i + 1).is_none_or(|n| n.date.iso_week() != d.date.iso_week()))
        .count();
    let count = |k| first.meetings.iter().filter(|m| m.kind == k).count();
    assert_eq!(count(MeetingKind::MarketAnalysis), week_ends);
    assert_eq!(count(MeetingKind::StrategyDevelopment), week_ends);
    assert_eq!(first.decisions.len(), week_ends);
    assert!(first.audit.is_empty(), "{:?}", first.audit);
    assert!(first.days.iter().all(|d| d.net_value > 0.0));
}

#[test]
fn transcripts_follow_speaking_orders() {
    let data = walk::market(8, 140, 11);
    let out = walk::full_run(&data, &walk::small_pool(), EngineConfig::default());
    let mam = out.meetings.iter().find(|m| m.kind == MeetingKind::MarketAnalysis).unwrap();
    let sdm = out.meetings.iter().find(|m| m.kind == MeetingKind::StrategyDevelopment).unwrap();
    for m in [mam, sdm] {
        assert_eq!(m.speakers(), m.kind.order());
        assert_eq!(m.synthesis.agent, "Otto");
        assert_eq!(m.memory_writes.len(), 1);
    }
    golden("mam.json", mam);
    golden("sdm.json", sdm);
}

/// Everything in the first symbol, scored above the alert line.
fn concentrated() -> (fundsim_core::marketdata::Dataset, chrono::NaiveDate, Account) {
    let data = walk::market(6, 120, 5);
    let day = data.calendar().days()[100];
    let view = data.view_at(day).unwrap();
    let sym = data.symbols()[0].clone();
    let px = view.bar_at_cursor(&sym).unwrap().close;
    let mut acct = Account::new(1_000_000.0, 0.001);
    let qty = (990_000.0 / px) as u64;
    acct.apply_action(&Action::Buy { symbol: sym, quantity: qty }, &view, "setup").unwrap();
    (data, day, acct)
}

#[test]
fn risk_alert_moves_to_cash_and_caps_weights() {
    let (data, day, mut acct) = concentrated();
    let view = data.view_at(day).unwrap();
    let cfg = RiskConfig::default();
    let mut report = assess(&acct, &view, &cfg, &LexiconSentiment::default()).unwrap();
    report.r_score = 0.9;
    let team = shipped_profiles();
    let backend = ScriptedBackend::new(3);
    let room = Room { team: &team, backend: &backend, embedder: &StubEmbedder };
    let before = acct.mark(&view).unwrap();
    let out = run_risk_alert(room, &view, &mut acct, &report, &cfg, &DeRiskConfig::default()).unwrap();
    let after = acct.mark(&view).unwrap();
    assert_eq!(out.record.speakers(), MeetingKind::RiskAlert.order());
    assert!(matches!(out.decision.action, Action::AdjustRiskExposure { .. }));
    let cash_before = 1.0 - before.invested();
    let cash_after = 1.0 - after.invested();
    assert!(cash_after - cash_before >= 0.2 - 1e-3, "{cash_before} -> {cash_after}");
    assert!(after.weights.values().all(|w| *w <= 0.25 + 1e-9), "{:?}", after.weights);
    golden("ram.json", &out.record);

    report.r_score = 0.7;
    assert!(matches!(
        run_risk_alert(room, &view, &mut acct, &report, &cfg, &DeRiskConfig::default()),
        Err(MeetingError::Config(_))
    ));
}

#[test]
fn failed_meetings_change_nothing() {
    let (data, day, mut acct) = concentrated();
    let view = data.view_at(day).unwrap();
    let cfg = RiskConfig::default();
    let mut report = assess(&acct, &view, &cfg, &LexiconSentiment::default()).unwrap();
    report.r_score = 0.9;
    let team = shipped_profiles();
    let snapshot = format!("{:?}", acct);
    // two analysts answer, the third call never does
    let backend = SequenceBackend::new([Ok("{}".to_string()), Ok("{}".to_string()), Err(BackendError::Exhausted)]);
    let room = Room { team: &team, backend: &backend, embedder: &StubEmbedder };
    let err = run_risk_alert(room, &view, &mut acct, &report, &cfg, &DeRiskConfig::default()).unwrap_err();
    assert!(matches!(err, MeetingError::Backend { kind: MeetingKind::RiskAlert, .. }), "{err}");
    assert_eq!(format!("{:?}", acct), snapshot);

    let friday = data.calendar().days().iter().copied().filter(|d| d.weekday() == chrono::Weekday::Fri).nth(15).unwrap();
    let view = data.view_at(friday).unwrap();
    let mut bank = MemoryBank::new();
    let backend = SequenceBackend::new([Ok("{}".to_string()), Err(BackendError::Exhausted)]);
    let room = Room { team: &team, backend: &backend, embedder: &StubEmbedder };
    let err = run_market_analysis(room, &view, &acct, &cfg, &LexiconSentiment::default(), &mut bank, 2000).unwrap_err();
    assert!(matches!(err, MeetingError::Backend { .. }), "{err}");
    assert_eq!(bank.len(), 0);
}

#[test]
fn meetings_only_on_week_end() {
    let data = walk::market(6, 120, 5);
    let wednesday = data.calendar().days().iter().copied().filter(|d| d.weekday() == chrono::Weekday::Wed).nth(10).unwrap();
    let view = data.view_at(wednesday).unwrap();
    let team = shipped_profiles();
    let backend = ScriptedBackend::new(1);
    let room = Room { team: &team, backend: &backend, embedder: &StubEmbedder };
    let mut bank = MemoryBank::new();
    let acct = Account::new(1_000.0, 0.0);
    let err = run_market_analysis(room, &view, &acct, &RiskConfig::default(), &LexiconSentiment::default(), &mut bank, 2000)
        .unwrap_err();
    assert!(matches!(err, MeetingError::NotWeekEnd { .. }));
    assert_eq!(backend_calls(&backend), 0);
}

fn backend_calls(b: &dyn fundsim_core::agents::ChatBackend) -> u64 {
    b.calls()
}

#[test]
fn transcripts_ignore_the_future() {
    let data = walk::market(6, 150, 99);
    let pool = walk::small_pool();
    let days = data.calendar().days();
    let cursors: Vec<_> = [64, 70, 79, 95, 111, 128, 149].iter().map(|&i| days[i]).collect();
    let bad = walk::transcript_violations(&data, &pool, &EngineConfig::default(), &cursors, 17);
    assert!(bad.is_empty(), "{bad:#?}");
}
