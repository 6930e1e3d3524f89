use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{PortfolioError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Buy,
    Sell,
}

/// One executed trade. `fee = quantity * price * fee_rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fill {
    pub date: NaiveDate,
    pub symbol: String,
    pub side: Side,
    #[serde(rename = "qty")]
    pub quantity: u64,
    pub price: f64,
    pub fee: f64,
    pub reason: String,
}

impl Fill {
    /// Gross traded value, `quantity * price`.
    pub fn notional(&self) -> f64 {
        self.quantity as f64 * self.price
    }
}

/// Writes `date,symbol,side,qty,price,fee,reason`. Floats use shortest round-trip form so
/// reading the file back gives bit-identical values.
pub fn write_ledger_csv<W: Write>(fills: &[Fill], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["date", "symbol", "side", "qty", "price", "fee", "reason"])
        .map_err(|e| PortfolioError::Ledger(e.to_string()))?;
    for f in fills {
        w.serialize(f).map_err(|e| PortfolioError::Ledger(e.to_string()))?;
    }
    w.flush().map_err(|e| PortfolioError::Ledger(e.to_string()))
}

pub fn read_ledger_csv<R: Read>(input: R) -> Result<Vec<Fill>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(|e| PortfolioError::Ledger(e.to_string())))
        .collect()
}
