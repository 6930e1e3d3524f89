//! Dataset directory checks: each file on its own, then the files together.

use std::fmt;
use std::path::{Path, PathBuf};

use fundsim_core::marketdata::{load_assets, load_bars, load_news, Dataset, SectorSet};

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FileReport {
    pub path: PathBuf,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub files: Vec<FileReport>,
}

impl ValidationReport {
    pub fn violations(&self) -> usize {
        self.files.iter().map(|f| f.violations.len()).sum()
    }

    pub fn is_clean(&self) -> bool {
        self.violations() == 0
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for file in &self.files {
            if file.violations.is_empty() {
                writeln!(f, "{}: ok", file.path.display())?;
            }
            for v in &file.violations {
                writeln!(f, "{}: {v}", file.path.display())?;
            }
        }
        write!(f, "{} violations", self.violations())
    }
}

pub(crate) fn files_with_ext(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|x| x == ext) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Checks `assets.csv`, every `bars/*.csv` and `news/*.jsonl`, then that every traded
/// symbol has a sector. Only a missing directory is an error; defects are reported.
pub fn validate_dir(dir: &Path) -> Result<ValidationReport> {
    if !dir.is_dir() {
        return Err(CliError::Invalid(format!("{}: not a directory", dir.display())));
    }
    let mut report = ValidationReport::default();
    let mut push = |path: PathBuf, violations: Vec<String>| report.files.push(FileReport { path, violations });

    let assets_path = dir.join("assets.csv");
    let assets = match load_assets(&assets_path, &SectorSet::default()) {
        Ok(a) => {
            push(assets_path, vec![]);
            Some(a)
        }
        Err(e) => {
            let msg = if assets_path.exists() {
                e.to_string()
            } else {
                "missing: assets.csv maps each symbol to its sector and is required".to_string()
            };
            push(assets_path, vec![msg]);
            None
        }
    };

    let bars_dir = dir.join("bars");
    let mut bars = Vec::new();
    let mut bars_ok = true;
    if bars_dir.is_dir() {
        let files = files_with_ext(&bars_dir, "csv")?;
        if files.is_empty() {
            push(bars_dir.clone(), vec!["no bar files".into()]);
            bars_ok = false;
        }
        for path in files {
            match load_bars(&path) {
                Ok(b) => {
                    bars.extend(b);
                    push(path, vec![]);
                }
                Err(e) => {
                    bars_ok = false;
                    push(path, vec![e.to_string()]);
                }
            }
        }
    } else {
        bars_ok = false;
        push(bars_dir, vec!["missing: bars/ directory with one CSV per symbol".into()]);
    }

    let mut news = Vec::new();
    let mut news_ok = true;
    let news_dir = dir.join("news");
    if news_dir.is_dir() {
        for path in files_with_ext(&news_dir, "jsonl")? {
            match load_news(&path) {
                Ok(n) => {
                    news.extend(n);
                    push(path, vec![]);
                }
                Err(e) => {
                    news_ok = false;
                    push(path, vec![e.to_string()]);
                }
            }
        }
    }

    if let (Some(assets), true, true) = (assets, bars_ok, news_ok) {
        let violations = match Dataset::new(bars, news, assets) {
            Ok(_) => vec![],
            Err(e) => vec![e.to_string()],
        };
        push(dir.to_path_buf(), violations);
    }
    Ok(report)
}
