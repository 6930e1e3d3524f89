//! Cash-and-positions account with an append-only fill ledger.
//!
//! The account executes [`Action`]s at the quoted close, charges a proportional fee per
//! side, never shorts and never borrows. Rejected actions leave the account untouched.
//! Replaying the ledger from the initial cash reproduces cash and positions exactly.

mod account;
mod action;
mod ledger;

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::marketdata::MarketView;

pub use account::{Account, Mark, Position, Snapshot, StopKind, StopOrder};
pub use action::{clip_weights, Action, ActionKind, ComplianceCaps};
pub use ledger::{read_ledger_csv, write_ledger_csv, Fill, Side};

pub const DEFAULT_FEE_RATE: f64 = 0.001;
pub const DEFAULT_INITIAL_CASH: f64 = 1_000_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PortfolioError {
    #[error("insufficient cash: need {needed:.6}, have {available:.6}")]
    InsufficientCash { needed: f64, available: f64 },
    #[error("insufficient shares of {symbol}: need {needed}, hold {held}")]
    InsufficientShares { symbol: String, needed: u64, held: u64 },
    #[error("no quote for `{symbol}` on {date}")]
    UnknownSymbol { symbol: String, date: NaiveDate },
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("cannot mark `{symbol}` on {date}: no price")]
    MissingPrice { symbol: String, date: NaiveDate },
    #[error("ledger: {0}")]
    Ledger(String),
}

pub type Result<T> = std::result::Result<T, PortfolioError>;

/// One day's prices for a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quote {
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
}

impl Quote {
    pub fn flat(price: f64) -> Self {
        Quote {
            open: price,
            high: price,
            low: price,
            close: price,
        }
    }
}

/// Price source for execution and marking, always for a single day.
pub trait Quotes {
    fn date(&self) -> NaiveDate;
    fn quote(&self, symbol: &str) -> Option<Quote>;
    fn sector(&self, symbol: &str) -> Option<String>;
}

impl Quotes for MarketView {
    fn date(&self) -> NaiveDate {
        self.cursor()
    }

    fn quote(&self, symbol: &str) -> Option<Quote> {
        self.bar_at_cursor(symbol).map(|b| Quote {
            open: b.open,
            high: b.high,
            low: b.low,
            close: b.close,
        })
    }

    fn sector(&self, symbol: &str) -> Option<String> {
        MarketView::sector(self, symbol).map(str::to_string)
    }
}

/// In-memory quotes for one day.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuoteBook {
    pub date: NaiveDate,
    pub quotes: BTreeMap<String, Quote>,
    pub sectors: BTreeMap<String, String>,
}

impl QuoteBook {
    pub fn new(date: NaiveDate) -> Self {
        QuoteBook {
            date,
            ..Default::default()
        }
    }

    pub fn with(mut self, symbol: &str, quote: Quote) -> Self {
        self.quotes.insert(symbol.to_string(), quote);
        self
    }

    pub fn with_close(self, symbol: &str, close: f64) -> Self {
        self.with(symbol, Quote::flat(close))
    }

    pub fn with_sector(mut self, symbol: &str, sector: &str) -> Self {
        self.sectors.insert(symbol.to_string(), sector.to_string());
        self
    }
}

impl Quotes for QuoteBook {
    fn date(&self) -> NaiveDate {
        self.date
    }

    fn quote(&self, symbol: &str) -> Option<Quote> {
        self.quotes.get(symbol).copied()
    }

    fn sector(&self, symbol: &str) -> Option<String> {
        self.sectors.get(symbol).cloned()
    }
}
