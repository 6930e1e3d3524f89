//! `fundsim report` and `fundsim compare`: the metric table and plot-ready CSVs.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use fundsim_core::metrics::MetricsReport;
use serde::Serialize;

use crate::artifacts::{self, read_metrics, read_net_value, CUMULATIVE};
use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulativeRow {
    pub date: NaiveDate,
    pub net_value: f64,
    /// Percent change from the first day's net value.
    pub return_index: f64,
}

pub fn cumulative_returns(run_dir: &Path) -> Result<Vec<CumulativeRow>> {
    let rows = read_net_value(&run_dir.join(artifacts::NET_VALUE))?;
    let Some(first) = rows.first().map(|r| r.net_value) else {
        return Err(CliError::Invalid(format!("{}: no rows", run_dir.join(artifacts::NET_VALUE).display())));
    };
    Ok(rows
        .iter()
        .map(|r| CumulativeRow {
            date: r.date,
            net_value: r.net_value,
            return_index: (r.net_value / first - 1.0) * 100.0,
        })
        .collect())
}

/// Fixed-width table, one row per run, the nine metric columns in canonical order.
pub fn metrics_table(rows: &[(String, MetricsReport)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(3).max(3);
    let mut out = format!("{:<width$}", "run");
    for k in MetricsReport::KEYS {
        out.push_str(&format!(" {k:>10}"));
    }
    out.push('\n');
    for (name, m) in rows {
        out.push_str(&format!("{name:<width$}"));
        for v in m.values() {
            match v {
                Some(x) => out.push_str(&format!(" {x:>10.4}")),
                None => out.push_str(&format!(" {:>10}", "-")),
            }
        }
        out.push('\n');
    }
    out
}

fn run_name(dir: &Path) -> String {
    dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// Prints-ready table for one run; writes `cumulative_returns.csv` into the run directory.
pub fn cmd_report(run_dir: &Path) -> Result<String> {
    let metrics = read_metrics(run_dir)?;
    let rows = cumulative_returns(run_dir)?;
    let path = run_dir.join(CUMULATIVE);
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(metrics_table(&[(run_name(run_dir), metrics)]))
}

#[derive(Debug, Serialize)]
struct LongRow<'a> {
    run_id: &'a str,
    date: NaiveDate,
    net_value: f64,
    return_index: f64,
}

/// Table over several runs, plus a long-format `run_id,date,net_value,return_index` CSV.
/// Run ids are directory names, suffixed with their position when two collide.
pub fn cmd_compare(run_dirs: &[PathBuf], out: &Path) -> Result<String> {
    let mut ids: Vec<String> = run_dirs.iter().map(|d| run_name(d)).collect();
    for i in 0..ids.len() {
        if ids.iter().filter(|x| **x == ids[i]).count() > 1 {
            ids[i] = format!("{}#{}", ids[i], i + 1);
        }
    }
    let mut w = csv::Writer::from_path(out).map_err(|e| CliError::Invalid(format!("{}: {e}", out.display())))?;
    let mut table = Vec::new();
    for (dir, id) in run_dirs.iter().zip(&ids) {
        table.push((id.clone(), read_metrics(dir)?));
        for r in cumulative_returns(dir)? {
            w.serialize(LongRow {
                run_id: id,
                date: r.date,
                net_value: r.net_value,
                return_index: r.return_index,
            })
            .map_err(|e| CliError::Invalid(format!("{}: {e}", out.display())))?;
        }
    }
    w.flush().map_err(|e| CliError::io(out, e))?;
    Ok(metrics_table(&table))
}
