use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{DataError, Result};

const BASE_HEADER: [&str; 7] = ["symbol", "date", "open", "high", "low", "close", "volume"];

/// One asset-day of OHLCV data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub symbol: String,
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjusted_close: Option<f64>,
}

/// Which close column feeds signals. Execution always uses `close`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceField {
    #[default]
    Close,
    AdjustedClose,
}

impl Bar {
    /// Checks the OHLC ordering and positivity constraints.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let prices = [
            ("open", self.open),
            ("high", self.high),
            ("low", self.low),
            ("close", self.close),
        ];
        for (name, p) in prices {
            if !p.is_finite() || p <= 0.0 {
                return Err(format!("{name} must be a positive finite price, got {p}"));
            }
        }
        if let Some(adj) = self.adjusted_close {
            if !adj.is_finite() || adj <= 0.0 {
                return Err(format!("adjusted_close must be positive, got {adj}"));
            }
        }
        if self.low > self.high {
            return Err(format!("low {} > high {}", self.low, self.high));
        }
        if self.low > self.open.min(self.close) {
            return Err(format!(
                "low {} above min(open, close) {}",
                self.low,
                self.open.min(self.close)
            ));
        }
        if self.high < self.open.max(self.close) {
            return Err(format!(
                "high {} below max(open, close) {}",
                self.high,
                self.open.max(self.close)
            ));
        }
        Ok(())
    }

    /// Close used for signal computation; falls back to `close` when no adjusted value exists.
    pub fn price(&self, field: PriceField) -> f64 {
        match field {
            PriceField::Close => self.close,
            PriceField::AdjustedClose => self.adjusted_close.unwrap_or(self.close),
        }
    }
}

/// Reads and validates a bar CSV file.
pub fn load_bars(path: &Path) -> Result<Vec<Bar>> {
    let file = std::fs::File::open(path).map_err(|e| DataError::io(path, e))?;
    parse_bars(file, path)
}

/// Parses bar CSV from any reader; `origin` is only used in error messages.
///
/// Output is sorted by `(symbol, date)`. Duplicate `(symbol, date)` pairs are rejected.
pub fn parse_bars<R: Read>(reader: R, origin: &Path) -> Result<Vec<Bar>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(rec) => rec.map_err(|e| parse_err(origin, 1, e.to_string()))?,
        None => {
            return Err(DataError::Header {
                path: origin.to_path_buf(),
                found: String::new(),
            })
        }
    };
    let cols: Vec<&str> = header.iter().collect();
    let has_adjusted = match cols.len() {
        7 => false,
        8 if cols[7] == "adjusted_close" => true,
        _ => false,
    };
    if cols.len() < 7 || cols[..7] != BASE_HEADER || (cols.len() == 8 && !has_adjusted) || cols.len() > 8 {
        return Err(DataError::Header {
            path: origin.to_path_buf(),
            found: cols.join(","),
        });
    }
    let width = cols.len();

    let mut bars = Vec::new();
    let mut lines = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(origin, line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != width {
            return Err(parse_err(
                origin,
                line,
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            field(i).parse::<f64>().map_err(|_| {
                parse_err(origin, line, format!("{} `{}` is not a number", BASE_HEADER.get(i).unwrap_or(&"adjusted_close"), field(i)))
            })
        };
        let symbol = field(0).to_string();
        if symbol.is_empty() {
            return Err(parse_err(origin, line, "empty symbol".into()));
        }
        let date = NaiveDate::parse_from_str(field(1), "%Y-%m-%d")
            .map_err(|_| parse_err(origin, line, format!("date `{}` is not ISO-8601", field(1))))?;
        let volume = field(6)
            .parse::<u64>()
            .map_err(|_| parse_err(origin, line, format!("volume `{}` is not a non-negative integer", field(6))))?;
        let adjusted_close = if has_adjusted && !field(7).is_empty() {
            Some(num(7)?)
        } else {
            None
        };
        let bar = Bar {
            symbol,
            date,
            open: num(2)?,
            high: num(3)?,
            low: num(4)?,
            close: num(5)?,
            volume,
            adjusted_close,
        };
        bar.validate().map_err(|message| DataError::Validation {
            path: origin.to_path_buf(),
            line,
            message: format!("{} {}: {message}", bar.symbol, bar.date),
        })?;
        bars.push(bar);
        lines.push(line);
    }

    let mut order: Vec<usize> = (0..bars.len()).collect();
    order.sort_by(|&a, &b| (&bars[a].symbol, bars[a].date).cmp(&(&bars[b].symbol, bars[b].date)));
    let mut seen = BTreeSet::new();
    for &i in &order {
        if !seen.insert((bars[i].symbol.as_str(), bars[i].date)) {
            return Err(DataError::Duplicate {
                path: origin.to_path_buf(),
                line: lines[i],
                symbol: bars[i].symbol.clone(),
                date: bars[i].date,
            });
        }
    }
    let mut slots: Vec<Option<Bar>> = bars.into_iter().map(Some).collect();
    Ok(order.into_iter().filter_map(|i| slots[i].take()).collect())
}

/// Writes bars in canonical CSV form. The adjusted column is emitted only when some bar has one.
pub fn write_bars<W: Write>(bars: &[Bar], out: W) -> std::io::Result<()> {
    let with_adjusted = bars.iter().any(|b| b.adjusted_close.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = BASE_HEADER.to_vec();
    if with_adjusted {
        header.push("adjusted_close");
    }
    w.write_record(&header)?;
    for b in bars {
        let mut row = vec![
            b.symbol.clone(),
            b.date.format("%Y-%m-%d").to_string(),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.volume.to_string(),
        ];
        if with_adjusted {
            row.push(b.adjusted_close.map(|a| a.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()
}

pub fn save_bars(bars: &[Bar], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| DataError::io(path, e))?;
    write_bars(bars, std::io::BufWriter::new(file)).map_err(|e| DataError::io(path, e))
}

fn parse_err(path: &Path, line: u64, message: String) -> DataError {
    DataError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    }
}
