//! Technical indicator catalog.
//!
//! Every indicator is a pure function from aligned OHLCV columns to one or more named
//! output lines. Entries whose lookback is not yet available are undefined (`None`),
//! never zero-filled. Indicators are addressed by config strings such as `SMA(n=20)` or
//! `MACD(fast=12,slow=26,signal=9)`; lookup is case-insensitive.

mod catalog;
mod kernels;
mod spec;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::marketdata::{Bar, PriceField};

pub use catalog::{list_catalog, lookup, reads_future, CatalogEntry, Channel, ParamDomain, ParamSpec, Scale};
pub use kernels::{ema, rolling_max, rolling_min, sma, stdev};
pub use spec::{IndicatorSpec, ParamValue};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndicatorError {
    #[error("unknown indicator `{0}`")]
    Unknown(String),
    #[error("{indicator}: parameter `{param}`: {message}")]
    Param {
        indicator: String,
        param: String,
        message: String,
    },
    #[error("cannot parse indicator spec `{input}`: {message}")]
    Syntax { input: String, message: String },
    #[error("{0}: input series is empty")]
    EmptyInput(String),
    #[error("{indicator} has no output line `{line}`")]
    UnknownLine { indicator: String, line: String },
}

/// Column-oriented bars for a single symbol, in date order.
///
/// When built with [`PriceField::AdjustedClose`], open/high/low are rescaled by the same
/// adjustment factor as the close so that ranges stay consistent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ohlcv {
    pub dates: Vec<NaiveDate>,
    pub open: Vec<f64>,
    pub high: Vec<f64>,
    pub low: Vec<f64>,
    pub close: Vec<f64>,
    pub volume: Vec<f64>,
}

impl Ohlcv {
    pub fn from_bars(bars: &[Bar], field: PriceField) -> Self {
        let mut out = Ohlcv::default();
        for b in bars {
            let px = b.price(field);
            let f = px / b.close;
            out.dates.push(b.date);
            out.open.push(b.open * f);
            out.high.push(b.high * f);
            out.low.push(b.low * f);
            out.close.push(px);
            out.volume.push(b.volume as f64);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.close.len()
    }

    pub fn is_empty(&self) -> bool {
        self.close.is_empty()
    }

    /// Suffix starting at `start`.
    pub fn slice_from(&self, start: usize) -> Ohlcv {
        Ohlcv {
            dates: self.dates[start..].to_vec(),
            open: self.open[start..].to_vec(),
            high: self.high[start..].to_vec(),
            low: self.low[start..].to_vec(),
            close: self.close[start..].to_vec(),
            volume: self.volume[start..].to_vec(),
        }
    }
}

/// Values aligned to trading days; `None` marks warm-up or otherwise undefined points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<Option<f64>>,
}

impl Series {
    pub(crate) fn from_raw(dates: &[NaiveDate], raw: Vec<f64>) -> Self {
        debug_assert_eq!(dates.len(), raw.len());
        Series {
            dates: dates.to_vec(),
            values: raw.into_iter().map(|v| (!v.is_nan()).then_some(v)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied().flatten()
    }

    /// Index of the first defined value.
    pub fn first_defined(&self) -> Option<usize> {
        self.values.iter().position(Option::is_some)
    }
}

/// All lines produced by one indicator, in catalog order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorOutput {
    pub spec: String,
    pub lines: Vec<(String, Series)>,
}

impl IndicatorOutput {
    pub fn line(&self, name: &str) -> Option<&Series> {
        self.lines
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, s)| s)
    }

    /// The first (primary) line.
    pub fn primary(&self) -> &Series {
        &self.lines[0].1
    }
}

/// Evaluates `spec` over `data`.
pub fn compute_indicator(spec: &IndicatorSpec, data: &Ohlcv) -> Result<IndicatorOutput, IndicatorError> {
    let entry = lookup(spec.name())?;
    if data.is_empty() {
        return Err(IndicatorError::EmptyInput(entry.name.to_string()));
    }
    let params = spec.resolved(entry)?;
    let raw = (entry.kernel)(data, &params);
    debug_assert_eq!(raw.len(), entry.lines.len());
    let lines = entry
        .lines
        .iter()
        .zip(raw)
        .map(|(name, values)| (name.to_string(), Series::from_raw(&data.dates, values)))
        .collect();
    Ok(IndicatorOutput {
        spec: spec.canonical(),
        lines,
    })
}

/// Raw NaN-coded output lines; for callers that need plain vectors.
pub fn compute_raw(spec: &IndicatorSpec, data: &Ohlcv) -> Result<Vec<Vec<f64>>, IndicatorError> {
    let entry = lookup(spec.name())?;
    if data.is_empty() {
        return Err(IndicatorError::EmptyInput(entry.name.to_string()));
    }
    let params = spec.resolved(entry)?;
    Ok((entry.kernel)(data, &params))
}
