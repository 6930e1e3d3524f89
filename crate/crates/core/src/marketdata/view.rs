use std::sync::atomic::{AtomicI32, Ordering};

use chrono::{Datelike, NaiveDate};

use super::{AssetMeta, Bar, DataError, Dataset, NewsItem, PriceField, Result};

const NOTHING_RETURNED: i32 = i32::MIN;

/// Read-only window onto a [`Dataset`] bounded by a cursor day.
///
/// Every accessor returns data dated on or before the cursor; asking for a later date is a
/// [`DataError::Lookahead`]. The view records the latest date it has ever handed out so tests
/// can assert the bound held.
#[derive(Debug)]
pub struct MarketView {
    data: Dataset,
    cursor: NaiveDate,
    universe: Vec<String>,
    max_returned: AtomicI32,
}

impl Clone for MarketView {
    fn clone(&self) -> Self {
        Self {
            data: self.data.clone(),
            cursor: self.cursor,
            universe: self.universe.clone(),
            max_returned: AtomicI32::new(self.max_returned.load(Ordering::Relaxed)),
        }
    }
}

impl MarketView {
    pub(crate) fn new(data: Dataset, cursor: NaiveDate, universe: Vec<String>) -> Self {
        Self {
            data,
            cursor,
            universe,
            max_returned: AtomicI32::new(NOTHING_RETURNED),
        }
    }

    pub fn cursor(&self) -> NaiveDate {
        self.cursor
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn price_field(&self) -> PriceField {
        self.data.price_field()
    }

    /// Same data, a different cursor (which must itself be a trading day).
    pub fn at(&self, cursor: NaiveDate) -> Result<MarketView> {
        if cursor > self.cursor {
            return Err(DataError::Lookahead {
                requested: cursor,
                cursor: self.cursor,
            });
        }
        self.data.view_with_universe(cursor, self.universe.clone())
    }

    fn note(&self, date: NaiveDate) {
        self.max_returned
            .fetch_max(date.num_days_from_ce(), Ordering::Relaxed);
    }

    /// Latest date this view has returned data for, if any.
    pub fn max_date_returned(&self) -> Option<NaiveDate> {
        match self.max_returned.load(Ordering::Relaxed) {
            NOTHING_RETURNED => None,
            d => NaiveDate::from_num_days_from_ce_opt(d),
        }
    }

    /// Trading days up to and including the cursor.
    pub fn calendar(&self) -> &[NaiveDate] {
        let days = self.data.calendar().up_to(self.cursor);
        if let Some(last) = days.last() {
            self.note(*last);
        }
        days
    }

    /// Whether the cursor day closes its trading week.
    pub fn cursor_is_week_end(&self) -> bool {
        self.data.calendar().last_trading_day_of_week(self.cursor)
    }

    /// All bars for `symbol` dated on or before the cursor.
    pub fn history(&self, symbol: &str) -> &[Bar] {
        let series = self.data.series(symbol);
        let end = series.partition_point(|b| b.date <= self.cursor);
        let out = &series[..end];
        if let Some(last) = out.last() {
            self.note(last.date);
        }
        out
    }

    /// The last `n` bars on or before the cursor (fewer if history is shorter).
    pub fn trailing(&self, symbol: &str, n: usize) -> &[Bar] {
        let h = self.history(symbol);
        &h[h.len().saturating_sub(n)..]
    }

    /// Bar on a given day; `Ok(None)` when the symbol did not trade that day.
    pub fn bar(&self, symbol: &str, date: NaiveDate) -> Result<Option<&Bar>> {
        if date > self.cursor {
            return Err(DataError::Lookahead {
                requested: date,
                cursor: self.cursor,
            });
        }
        let series = self.data.series(symbol);
        let found = series
            .binary_search_by_key(&date, |b| b.date)
            .ok()
            .map(|i| &series[i]);
        if let Some(b) = found {
            self.note(b.date);
        }
        Ok(found)
    }

    /// Bar on the cursor day, if the symbol traded.
    pub fn bar_at_cursor(&self, symbol: &str) -> Option<&Bar> {
        self.bar(symbol, self.cursor).ok().flatten()
    }

    /// Close on the cursor day.
    pub fn close(&self, symbol: &str) -> Option<f64> {
        self.bar_at_cursor(symbol).map(|b| b.close)
    }

    /// `(date, close)` pairs in `[from, to]`.
    pub fn closes_between(&self, symbol: &str, from: NaiveDate, to: NaiveDate) -> Result<Vec<(NaiveDate, f64)>> {
        if to > self.cursor {
            return Err(DataError::Lookahead {
                requested: to,
                cursor: self.cursor,
            });
        }
        let out: Vec<(NaiveDate, f64)> = self
            .history(symbol)
            .iter()
            .filter(|b| b.date >= from && b.date <= to)
            .map(|b| (b.date, b.close))
            .collect();
        Ok(out)
    }

    /// Signal prices (close or adjusted close, per dataset setting) on or before the cursor.
    pub fn signal_prices(&self, symbol: &str) -> Vec<f64> {
        let field = self.price_field();
        self.history(symbol).iter().map(|b| b.price(field)).collect()
    }

    /// News dated on or before the cursor.
    pub fn news(&self) -> &[NewsItem] {
        let all = self.data.all_news();
        let end = all.partition_point(|n| n.date() <= self.cursor);
        let out = &all[..end];
        if let Some(last) = out.last() {
            self.note(last.date());
        }
        out
    }

    /// News dated in `[from, cursor]`.
    pub fn news_since(&self, from: NaiveDate) -> &[NewsItem] {
        let visible = self.news();
        let start = visible.partition_point(|n| n.date() < from);
        &visible[start..]
    }

    pub fn sector(&self, symbol: &str) -> Option<&str> {
        self.data.sector(symbol)
    }

    pub fn asset_meta(&self, symbol: &str) -> Option<AssetMeta> {
        let sector = self.data.sector(symbol)?.to_string();
        let window = self.trailing(symbol, self.data.adv_window());
        let adv = if window.is_empty() {
            0.0
        } else {
            window.iter().map(|b| b.volume as f64).sum::<f64>() / window.len() as f64
        };
        Some(AssetMeta {
            symbol: symbol.to_string(),
            sector,
            average_daily_volume: adv,
        })
    }
}
