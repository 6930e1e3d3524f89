use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{
    load_bars, load_news, trading_calendar, Bar, DataError, MarketView, NewsItem, PriceField,
    Result, TradingCalendar,
};

/// Trailing window, in trading days, for average daily volume.
pub const DEFAULT_ADV_WINDOW: usize = 20;

const GICS_SECTORS: [&str; 11] = [
    "Communication Services",
    "Consumer Discretionary",
    "Consumer Staples",
    "Energy",
    "Financials",
    "Health Care",
    "Industrials",
    "Information Technology",
    "Materials",
    "Real Estate",
    "Utilities",
];

/// Closed set of sector labels accepted in `assets.csv`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorSet(BTreeSet<String>);

impl Default for SectorSet {
    fn default() -> Self {
        Self(GICS_SECTORS.iter().map(|s| s.to_string()).collect())
    }
}

impl SectorSet {
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(labels.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, sector: &str) -> bool {
        self.0.contains(sector)
    }
}

/// Per-asset metadata as of a view's cursor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetMeta {
    pub symbol: String,
    pub sector: String,
    /// Mean volume over the trailing window ending at the cursor, in shares.
    pub average_daily_volume: f64,
}

/// Reads `symbol,sector` rows.
pub fn load_assets(path: &Path, sectors: &SectorSet) -> Result<BTreeMap<String, String>> {
    if !path.exists() {
        return Err(DataError::MissingFile(path.to_path_buf()));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| DataError::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
    let headers = rdr
        .headers()
        .map_err(|e| DataError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["symbol", "sector"] {
        return Err(DataError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header `symbol,sector`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| DataError::Parse {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let symbol = rec.get(0).unwrap_or("").to_string();
        let sector = rec.get(1).unwrap_or("").to_string();
        if symbol.is_empty() {
            return Err(DataError::Parse {
                path: path.to_path_buf(),
                line,
                message: "empty symbol".into(),
            });
        }
        if !sectors.contains(&sector) {
            return Err(DataError::UnknownSector {
                path: path.to_path_buf(),
                line,
                symbol,
                sector,
            });
        }
        out.insert(symbol, sector);
    }
    Ok(out)
}

#[derive(Debug)]
struct Inner {
    bars: BTreeMap<String, Vec<Bar>>,
    news: Vec<NewsItem>,
    sectors: BTreeMap<String, String>,
    calendar: TradingCalendar,
    price_field: PriceField,
    adv_window: usize,
}

/// Immutable market dataset. Cloning is cheap; the contents are shared.
#[derive(Debug, Clone)]
pub struct Dataset {
    inner: Arc<Inner>,
}

impl Dataset {
    pub fn new(
        bars: Vec<Bar>,
        news: Vec<NewsItem>,
        sectors: BTreeMap<String, String>,
    ) -> Result<Self> {
        let calendar = trading_calendar(&bars)?;
        let mut by_symbol: BTreeMap<String, Vec<Bar>> = BTreeMap::new();
        for bar in bars {
            bar.validate().map_err(|message| DataError::Validation {
                path: PathBuf::from("<dataset>"),
                line: 0,
                message: format!("{} {}: {message}", bar.symbol, bar.date),
            })?;
            by_symbol.entry(bar.symbol.clone()).or_default().push(bar);
        }
        for (symbol, series) in by_symbol.iter_mut() {
            if !sectors.contains_key(symbol) {
                return Err(DataError::MissingSector(symbol.clone()));
            }
            series.sort_by_key(|b| b.date);
            if let Some(w) = series.windows(2).find(|w| w[0].date == w[1].date) {
                return Err(DataError::Duplicate {
                    path: PathBuf::from("<dataset>"),
                    line: 0,
                    symbol: symbol.clone(),
                    date: w[0].date,
                });
            }
        }
        let (first, last) = (calendar.first(), calendar.last());
        for item in &news {
            if item.date() < first || item.date() > last {
                return Err(DataError::News {
                    path: PathBuf::from("<dataset>"),
                    line: 0,
                    message: format!(
                        "`{}` dated {} lies outside the dataset range {first}..{last}",
                        item.headline,
                        item.date()
                    ),
                });
            }
        }
        let mut news = news;
        news.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.headline.cmp(&b.headline)));
        Ok(Self {
            inner: Arc::new(Inner {
                bars: by_symbol,
                news,
                sectors,
                calendar,
                price_field: PriceField::Close,
                adv_window: DEFAULT_ADV_WINDOW,
            }),
        })
    }

    /// Loads `bars/*.csv`, `news/*.jsonl` (optional) and `assets.csv` from a data directory.
    pub fn load_dir(dir: &Path, sectors: &SectorSet) -> Result<Self> {
        let assets = load_assets(&dir.join("assets.csv"), sectors)?;
        let mut bars = Vec::new();
        for path in sorted_files(&dir.join("bars"), "csv")? {
            bars.extend(load_bars(&path)?);
        }
        let mut news = Vec::new();
        let news_dir = dir.join("news");
        if news_dir.is_dir() {
            for path in sorted_files(&news_dir, "jsonl")? {
                news.extend(load_news(&path)?);
            }
        }
        Self::new(bars, news, assets)
    }

    pub fn with_price_field(&self, field: PriceField) -> Self {
        let mut inner = self.clone_inner();
        inner.price_field = field;
        Self { inner: Arc::new(inner) }
    }

    pub fn with_adv_window(&self, window: usize) -> Self {
        let mut inner = self.clone_inner();
        inner.adv_window = window.max(1);
        Self { inner: Arc::new(inner) }
    }

    /// Returns a copy with `f` applied to every bar. Earlier views keep seeing the old data.
    pub fn map_bars(&self, mut f: impl FnMut(&mut Bar)) -> Self {
        let mut inner = self.clone_inner();
        for series in inner.bars.values_mut() {
            for bar in series.iter_mut() {
                f(bar);
            }
        }
        Self { inner: Arc::new(inner) }
    }

    /// Returns a copy with `f` applied to every news item.
    pub fn map_news(&self, mut f: impl FnMut(&mut NewsItem)) -> Self {
        let mut inner = self.clone_inner();
        inner.news.iter_mut().for_each(&mut f);
        Self { inner: Arc::new(inner) }
    }

    fn clone_inner(&self) -> Inner {
        Inner {
            bars: self.inner.bars.clone(),
            news: self.inner.news.clone(),
            sectors: self.inner.sectors.clone(),
            calendar: self.inner.calendar.clone(),
            price_field: self.inner.price_field,
            adv_window: self.inner.adv_window,
        }
    }

    pub fn calendar(&self) -> &TradingCalendar {
        &self.inner.calendar
    }

    pub fn symbols(&self) -> Vec<String> {
        self.inner.bars.keys().cloned().collect()
    }

    pub fn sectors(&self) -> &BTreeMap<String, String> {
        &self.inner.sectors
    }

    pub fn sector(&self, symbol: &str) -> Option<&str> {
        self.inner.sectors.get(symbol).map(String::as_str)
    }

    pub fn price_field(&self) -> PriceField {
        self.inner.price_field
    }

    pub fn adv_window(&self) -> usize {
        self.inner.adv_window
    }

    /// All bars for a symbol, unbounded. Crate-internal: decisions go through [`MarketView`].
    pub(crate) fn series(&self, symbol: &str) -> &[Bar] {
        self.inner.bars.get(symbol).map(Vec::as_slice).unwrap_or(&[])
    }

    pub(crate) fn all_news(&self) -> &[NewsItem] {
        &self.inner.news
    }

    pub fn all_bars(&self) -> impl Iterator<Item = &Bar> {
        self.inner.bars.values().flat_map(|v| v.iter())
    }

    pub fn view_at(&self, cursor: NaiveDate) -> Result<MarketView> {
        self.view_with_universe(cursor, self.symbols())
    }

    pub fn view_with_universe(&self, cursor: NaiveDate, universe: Vec<String>) -> Result<MarketView> {
        if !self.inner.calendar.contains(cursor) {
            return Err(DataError::NotInCalendar(cursor));
        }
        for s in &universe {
            if !self.inner.bars.contains_key(s) {
                return Err(DataError::UnknownSymbol(s.clone()));
            }
        }
        Ok(MarketView::new(self.clone(), cursor, universe))
    }
}

fn sorted_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(DataError::MissingFile(dir.to_path_buf()));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| DataError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some(ext))
        .collect();
    files.sort();
    Ok(files)
}
