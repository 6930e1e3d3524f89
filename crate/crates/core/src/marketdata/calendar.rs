use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{Bar, DataError, Result};

/// Sorted, de-duplicated list of days on which at least one bar exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradingCalendar {
    days: Vec<NaiveDate>,
}

pub fn trading_calendar(bars: &[Bar]) -> Result<TradingCalendar> {
    if bars.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    let mut days: Vec<NaiveDate> = bars.iter().map(|b| b.date).collect();
    days.sort_unstable();
    days.dedup();
    Ok(TradingCalendar { days })
}

impl TradingCalendar {
    pub fn from_days(mut days: Vec<NaiveDate>) -> Result<Self> {
        if days.is_empty() {
            return Err(DataError::EmptyDataset);
        }
        days.sort_unstable();
        days.dedup();
        Ok(Self { days })
    }

    pub fn days(&self) -> &[NaiveDate] {
        &self.days
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn first(&self) -> NaiveDate {
        self.days[0]
    }

    pub fn last(&self) -> NaiveDate {
        self.days[self.days.len() - 1]
    }

    pub fn index_of(&self, day: NaiveDate) -> Option<usize> {
        self.days.binary_search(&day).ok()
    }

    pub fn contains(&self, day: NaiveDate) -> bool {
        self.index_of(day).is_some()
    }

    /// Days up to and including `day`.
    pub fn up_to(&self, day: NaiveDate) -> &[NaiveDate] {
        let end = self.days.partition_point(|d| *d <= day);
        &self.days[..end]
    }

    pub fn next_after(&self, day: NaiveDate) -> Option<NaiveDate> {
        let i = self.days.partition_point(|d| *d <= day);
        self.days.get(i).copied()
    }

    /// True when `day` trades and no later calendar day falls in the same ISO week.
    ///
    /// The final calendar day always closes its week.
    pub fn last_trading_day_of_week(&self, day: NaiveDate) -> bool {
        if !self.contains(day) {
            return false;
        }
        match self.next_after(day) {
            Some(next) => next.iso_week() != day.iso_week(),
            None => true,
        }
    }

    /// All week-final trading days within `[from, to]`.
    pub fn week_ends(&self, from: NaiveDate, to: NaiveDate) -> Vec<NaiveDate> {
        self.days
            .iter()
            .copied()
            .filter(|d| *d >= from && *d <= to && self.last_trading_day_of_week(*d))
            .collect()
    }
}
