use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::{DataError, Result};

/// A dated news item. An empty `symbols` list marks market-wide news.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsItem {
    pub timestamp: DateTime<Utc>,
    #[serde(default)]
    pub symbols: Vec<String>,
    pub headline: String,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub source: String,
}

impl NewsItem {
    pub fn date(&self) -> NaiveDate {
        self.timestamp.date_naive()
    }

    /// Market-wide items match every symbol.
    pub fn mentions(&self, symbol: &str) -> bool {
        self.symbols.is_empty() || self.symbols.iter().any(|s| s == symbol)
    }
}

pub fn load_news(path: &Path) -> Result<Vec<NewsItem>> {
    let file = std::fs::File::open(path).map_err(|e| DataError::io(path, e))?;
    parse_news(file, path)
}

/// Parses JSON Lines news, one object per line; blank lines are skipped.
pub fn parse_news<R: Read>(reader: R, origin: &Path) -> Result<Vec<NewsItem>> {
    let mut items = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line.map_err(|e| DataError::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item: NewsItem = serde_json::from_str(&line).map_err(|e| DataError::News {
            path: origin.to_path_buf(),
            line: line_no,
            message: e.to_string(),
        })?;
        if item.headline.trim().is_empty() {
            return Err(DataError::News {
                path: origin.to_path_buf(),
                line: line_no,
                message: "headline is empty".into(),
            });
        }
        items.push(item);
    }
    items.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.headline.cmp(&b.headline)));
    Ok(items)
}
