//! Run artifact files: writers, and loaders that read them back.
//!
//! | file | columns / shape |
//! |---|---|
//! | `net_value.csv` | `date,net_value,cash,r_score,risk_alert` |
//! | `weights.csv` | `date,<symbol>...,CASH` (fractions of net value) |
//! | `ledger.csv` | `date,symbol,side,qty,price,fee,reason` |
//! | `decisions.json` | array of weekly decisions |
//! | `meetings/<date>-<kind>.json` | one transcript each |
//! | `metrics.json` | the nine metrics, `null` where degenerate |
//! | `manifest.json` | hashes, seed, status |
//! | `cumulative_returns.csv` | `date,net_value,return_index` (written by `report`) |

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use fundsim_core::meetings::{DayRecord, MeetingRecord, RunOutput};
use fundsim_core::metrics::MetricsReport;
use fundsim_core::portfolio::{read_ledger_csv, write_ledger_csv, Fill};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{CliError, Result};

pub const NET_VALUE: &str = "net_value.csv";
pub const WEIGHTS: &str = "weights.csv";
pub const LEDGER: &str = "ledger.csv";
pub const DECISIONS: &str = "decisions.json";
pub const MEETINGS: &str = "meetings";
pub const METRICS: &str = "metrics.json";
pub const MANIFEST: &str = "manifest.json";
pub const CUMULATIVE: &str = "cumulative_returns.csv";
pub const CASH_COLUMN: &str = "CASH";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub date: Option<NaiveDate>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub fundsim_version: String,
    pub status: String,
    pub failure: Option<Failure>,
    pub seed: Option<u64>,
    pub backend: String,
    pub config_sha256: String,
    pub data_sha256: String,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    pub trading_days: usize,
    pub meetings: BTreeMap<String, usize>,
    /// sha256 of each artifact, by path relative to the run directory.
    pub artifacts: BTreeMap<String, String>,
    pub config: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash over every file under `dir` (relative path and content), in path order.
pub fn hash_tree(dir: &Path) -> Result<String> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
        for entry in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
            let path = entry.map_err(|e| CliError::io(dir, e))?.path();
            if path.is_dir() {
                walk(&path, out)?;
            } else {
                out.push(path);
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    walk(dir, &mut files)?;
    files.sort();
    let mut h = Sha256::new();
    for f in files {
        let rel = f.strip_prefix(dir).unwrap_or(&f).to_string_lossy().replace('\\', "/");
        h.update(rel.as_bytes());
        h.update([0]);
        h.update(std::fs::read(&f).map_err(|e| CliError::io(&f, e))?);
    }
    Ok(hex::encode(h.finalize()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| CliError::io(path, e))?))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Invalid(format!("{}: {e}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("artifact serializes") + "\n";
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| missing_or_io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn missing_or_io(path: &Path, e: std::io::Error) -> CliError {
    if e.kind() == std::io::ErrorKind::NotFound {
        CliError::Invalid(format!("missing artifact {}", path.display()))
    } else {
        CliError::io(path, e)
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| missing_or_io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetValueRow {
    pub date: NaiveDate,
    pub net_value: f64,
    pub cash: f64,
    pub r_score: f64,
    pub risk_alert: bool,
}

pub fn write_net_value(path: &Path, days: &[DayRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for d in days {
        w.serialize(NetValueRow {
            date: d.date,
            net_value: d.net_value,
            cash: d.cash,
            r_score: d.r_score,
            risk_alert: d.risk_alert,
        })
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn read_net_value(path: &Path) -> Result<Vec<NetValueRow>> {
    csv::Reader::from_reader(open(path)?)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| csv_err(path, e))
}

/// Wide table: one column per universe symbol, then cash.
pub fn write_weights(path: &Path, universe: &[String], days: &[DayRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["date".to_string()];
    header.extend(universe.iter().cloned());
    header.push(CASH_COLUMN.into());
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for d in days {
        let mut row = vec![d.date.to_string()];
        row.extend(universe.iter().map(|s| d.weights.get(s).copied().unwrap_or(0.0).to_string()));
        let cash = if d.net_value > 0.0 { d.cash / d.net_value } else { 1.0 };
        row.push(cash.to_string());
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub columns: Vec<String>,
    pub rows: Vec<(NaiveDate, Vec<f64>)>,
}

pub fn read_weights(path: &Path) -> Result<WeightTable> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let columns: Vec<String> = r.headers().map_err(|e| csv_err(path, e))?.iter().skip(1).map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let bad = |m: String| CliError::Invalid(format!("{}: {m}", path.display()));
        let date = rec.get(0).unwrap_or("").parse().map_err(|e| bad(format!("date: {e}")))?;
        let vals = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>().map_err(|e| bad(format!("weight {v}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push((date, vals));
    }
    Ok(WeightTable { columns, rows })
}

pub fn write_ledger(path: &Path, fills: &[Fill]) -> Result<()> {
    write_ledger_csv(fills, create(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

pub fn read_ledger(path: &Path) -> Result<Vec<Fill>> {
    read_ledger_csv(open(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

pub fn read_meetings(dir: &Path) -> Result<Vec<MeetingRecord>> {
    let mdir = dir.join(MEETINGS);
    if !mdir.is_dir() {
        return Err(CliError::Invalid(format!("missing artifact {}", mdir.display())));
    }
    crate::validate::files_with_ext(&mdir, "json")?.iter().map(|p| read_json(p)).collect()
}

/// Writes every run artifact except the manifest and returns their hashes. Stale meeting
/// files from an earlier run in the same directory are removed first.
pub fn write_run(dir: &Path, universe: &[String], out: &RunOutput) -> Result<BTreeMap<String, String>> {
    let mdir = dir.join(MEETINGS);
    std::fs::create_dir_all(&mdir).map_err(|e| CliError::io(&mdir, e))?;
    for old in crate::validate::files_with_ext(&mdir, "json")? {
        std::fs::remove_file(&old).map_err(|e| CliError::io(&old, e))?;
    }
    write_net_value(&dir.join(NET_VALUE), &out.days)?;
    write_weights(&dir.join(WEIGHTS), universe, &out.days)?;
    write_ledger(&dir.join(LEDGER), &out.ledger)?;
    write_json(&dir.join(DECISIONS), &out.decisions)?;
    write_json(&dir.join(METRICS), &out.metrics)?;
    let mut names: Vec<String> = [NET_VALUE, WEIGHTS, LEDGER, DECISIONS, METRICS].iter().map(|s| s.to_string()).collect();
    for m in &out.meetings {
        let name = format!("{MEETINGS}/{}", m.file_name());
        write_json(&dir.join(&name), m)?;
        names.push(name);
    }
    let mut hashes = BTreeMap::new();
    for name in names {
        let path = dir.join(&name);
        let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        hashes.insert(name, sha256_hex(&bytes));
    }
    Ok(hashes)
}

pub fn read_metrics(dir: &Path) -> Result<MetricsReport> {
    read_json(&dir.join(METRICS))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day(d: u32, nv: f64, cash: f64) -> DayRecord {
        DayRecord {
            date: NaiveDate::from_ymd_opt(2024, 3, d).unwrap(),
            net_value: nv,
            cash,
            weights: BTreeMap::from([("A".to_string(), (nv - cash) / nv)]),
            r_score: 0.1 * d as f64,
            risk_alert: d == 5,
            fills: 0,
        }
    }

    #[test]
    fn tables_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let days = vec![day(4, 100.0, 40.0), day(5, 101.3, 40.0), day(6, 1.0 / 3.0, 0.1)];
        let p = dir.path().join(NET_VALUE);
        write_net_value(&p, &days).unwrap();
        let back = read_net_value(&p).unwrap();
        for (a, b) in days.iter().zip(&back) {
            assert_eq!((a.date, a.net_value, a.cash, a.r_score, a.risk_alert), (b.date, b.net_value, b.cash, b.r_score, b.risk_alert));
        }
        let p = dir.path().join(WEIGHTS);
        let universe = vec!["A".to_string(), "B".to_string()];
        write_weights(&p, &universe, &days).unwrap();
        let t = read_weights(&p).unwrap();
        assert_eq!(t.columns, ["A", "B", CASH_COLUMN]);
        assert_eq!(t.rows[0].1, vec![0.6, 0.0, 0.4]);
    }

    #[test]
    fn missing_artifacts_are_named() {
        let dir = tempfile::tempdir().unwrap();
        let e = read_metrics(dir.path()).unwrap_err();
        assert!(e.to_string().contains("missing artifact") && e.to_string().contains(METRICS), "{e}");
        assert_eq!(e.exit_code(), 2);
    }
}
