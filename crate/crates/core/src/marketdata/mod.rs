//! Market data ingestion and the time-cursor view.
//!
//! Bars come from CSV files (`symbol,date,open,high,low,close,volume[,adjusted_close]`),
//! news from JSON Lines and sector labels from `assets.csv`. Everything loaded is
//! immutable; decisions read it through a [`MarketView`], which refuses to hand out
//! anything dated after its cursor.

mod bars;
mod calendar;
mod dataset;
mod news;
mod view;

use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub use bars::{load_bars, parse_bars, save_bars, write_bars, Bar, PriceField};
pub use calendar::{trading_calendar, TradingCalendar};
pub use dataset::{load_assets, AssetMeta, Dataset, SectorSet, DEFAULT_ADV_WINDOW};
pub use news::{load_news, parse_news, NewsItem};
pub use view::MarketView;

pub type Result<T> = std::result::Result<T, DataError>;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: header mismatch, expected `symbol,date,open,high,low,close,volume[,adjusted_close]`, found `{found}`")]
    Header { path: PathBuf, found: String },
    #[error("{path}:{line}: parse error: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}:{line}: invalid bar: {message}")]
    Validation {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}:{line}: duplicate bar for {symbol} on {date}")]
    Duplicate {
        path: PathBuf,
        line: u64,
        symbol: String,
        date: NaiveDate,
    },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("required file missing: {0}")]
    MissingFile(PathBuf),
    #[error("no sector assigned to symbol {0} (add it to assets.csv)")]
    MissingSector(String),
    #[error("{path}:{line}: sector `{sector}` for {symbol} is not in the configured sector set")]
    UnknownSector {
        path: PathBuf,
        line: u64,
        symbol: String,
        sector: String,
    },
    #[error("{path}:{line}: news item: {message}")]
    News {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("lookahead: requested {requested} but the view cursor is {cursor}")]
    Lookahead {
        requested: NaiveDate,
        cursor: NaiveDate,
    },
    #[error("{0} is not a trading day in the calendar")]
    NotInCalendar(NaiveDate),
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
}

impl DataError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DataError::Io {
            path: path.into(),
            source,
        }
    }
}
