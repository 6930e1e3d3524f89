//! Seeded synthetic market: factor-driven OHLCV bars, sector labels and templated news.
//!
//! Used for the bundled demo dataset and for tests that need a realistic but fully
//! reproducible market.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Datelike, Days, NaiveDate, Utc, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::marketdata::{save_bars, Bar, DataError, Dataset, NewsItem, Result};

const TICKERS: [&str; 26] = [
    "ALFA", "BRVO", "CHRL", "DLTA", "ECHO", "FXTR", "GOLF", "HTLX", "INDG", "JULT", "KILO", "LIMA", "MIKE",
    "NOVA", "OSCR", "PAPA", "QBEC", "ROMO", "SIER", "TANG", "UNFM", "VICT", "WHSK", "XRAY", "YANK", "ZULU",
];

const SECTORS: [&str; 5] = [
    "Information Technology",
    "Health Care",
    "Financials",
    "Consumer Discretionary",
    "Energy",
];

const GOOD: [&str; 4] = [
    "{} beats earnings expectations as demand stays strong",
    "Analysts upgrade {} after record quarterly growth",
    "{} shares rally on new product launch",
    "{} raises guidance, citing robust profit outlook",
];

const BAD: [&str; 4] = [
    "{} misses revenue estimates amid weak demand",
    "Analysts downgrade {} on margin concerns",
    "{} shares fall after regulatory probe",
    "{} cuts outlook as costs surge, warns of losses",
];

const MARKET_GOOD: [&str; 2] = [
    "Stocks rise as inflation cools and growth beats forecasts",
    "Markets rally on strong jobs data",
];

const MARKET_BAD: [&str; 2] = [
    "Stocks fall as recession fears grow",
    "Markets slump after weak manufacturing data",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub symbols: usize,
    pub start: NaiveDate,
    /// Trading days (weekdays) to generate.
    pub days: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    /// Two years of twenty symbols.
    fn default() -> Self {
        SynthConfig {
            symbols: 20,
            start: NaiveDate::from_ymd_opt(2022, 1, 3).expect("valid date"),
            days: 504,
            seed: 20_240_101,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub bars: Vec<Bar>,
    pub news: Vec<NewsItem>,
    pub sectors: BTreeMap<String, String>,
}

fn ticker(i: usize) -> String {
    TICKERS.get(i).map_or_else(|| format!("S{i:03}"), |t| t.to_string())
}

/// Weekdays starting at `start`.
pub fn weekdays(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

fn after_close(d: NaiveDate) -> DateTime<Utc> {
    d.and_hms_opt(21, 0, 0).expect("valid time").and_utc()
}

/// Generates the market. Each symbol's log return mixes a market factor, a sector factor
/// and idiosyncratic noise; a third of the symbols also carry a slow trend and a third a
/// mean-reverting pull toward their starting level.
pub fn generate(cfg: &SynthConfig) -> SynthData {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dates = weekdays(cfg.start, cfg.days);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let names: Vec<String> = (0..cfg.symbols).map(ticker).collect();
    let sectors: BTreeMap<String, String> = names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), SECTORS[i % SECTORS.len()].to_string()))
        .collect();
    struct Params {
        beta: f64,
        drift: f64,
        vol: f64,
        pull: f64,
        price: f64,
        anchor: f64,
        volume: f64,
    }
    let mut params: Vec<Params> = (0..cfg.symbols)
        .map(|i| {
            let price = rng.random_range(20.0..400.0);
            Params {
                beta: rng.random_range(0.6..1.4),
                drift: if i % 3 == 0 { rng.random_range(-0.0008..0.0015) } else { 0.0 },
                vol: rng.random_range(0.008..0.022),
                pull: if i % 3 == 1 { rng.random_range(0.03..0.1) } else { 0.0 },
                price,
                anchor: price.ln(),
                volume: rng.random_range(2e5..5e6),
            }
        })
        .collect();

    let mut bars = Vec::with_capacity(dates.len() * cfg.symbols);
    let mut news = Vec::new();
    for d in &dates {
        let market = 0.0003 + 0.009 * unit.sample(&mut rng);
        let sector_moves: Vec<f64> = (0..SECTORS.len()).map(|_| 0.005 * unit.sample(&mut rng)).collect();
        let mut day_returns = Vec::with_capacity(cfg.symbols);
        for (i, p) in params.iter_mut().enumerate() {
            let reversion = p.pull * (p.anchor - p.price.ln());
            let r = p.drift + reversion + p.beta * market + sector_moves[i % SECTORS.len()] + p.vol * unit.sample(&mut rng);
            let prev = p.price;
            let open = prev * (0.3 * r + 0.002 * unit.sample(&mut rng)).exp();
            let close = prev * r.exp();
            let span = (p.vol * 0.6 * unit.sample(&mut rng).abs()).min(0.08);
            let high = open.max(close) * (1.0 + span);
            let low = open.min(close) * (1.0 - span * rng.random_range(0.3..1.0));
            let volume = (p.volume * (0.35 * unit.sample(&mut rng)).exp() * (1.0 + 20.0 * r.abs())).round() as u64;
            p.price = close;
            day_returns.push(r);
            bars.push(Bar {
                symbol: names[i].clone(),
                date: *d,
                open: round4(open),
                high: round4(high),
                low: round4(low),
                close: round4(close),
                volume: volume.max(1),
                adjusted_close: None,
            });
        }
        // round trips can break the ordering invariants by a hair; restore them
        for b in bars.iter_mut().rev().take(cfg.symbols) {
            b.high = b.high.max(b.open).max(b.close);
            b.low = b.low.min(b.open).min(b.close);
        }
        if rng.random_bool(0.7) && cfg.symbols > 0 {
            let i = rng.random_range(0..cfg.symbols);
            let pool = if day_returns[i] >= 0.0 { &GOOD } else { &BAD };
            let headline = pool[rng.random_range(0..pool.len())].replace("{}", &names[i]);
            news.push(NewsItem {
                timestamp: after_close(*d),
                symbols: vec![names[i].clone()],
                body: format!("{headline}. Shares closed at {:.2}.", params[i].price),
                headline,
                source: "synthetic-wire".into(),
            });
        }
        if d.weekday() == Weekday::Fri {
            let pool = if market >= 0.0 { &MARKET_GOOD } else { &MARKET_BAD };
            let headline = pool[rng.random_range(0..pool.len())].to_string();
            news.push(NewsItem {
                timestamp: after_close(*d) + chrono::Duration::minutes(30),
                symbols: Vec::new(),
                body: headline.clone(),
                headline,
                source: "synthetic-wire".into(),
            });
        }
    }
    SynthData { bars, news, sectors }
}

fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

impl SynthData {
    pub fn into_dataset(self) -> Result<Dataset> {
        Dataset::new(self.bars, self.news, self.sectors)
    }

    /// Writes `assets.csv`, `bars/<SYMBOL>.csv` and `news/news.jsonl` under `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        let mkdir = |p: &Path| std::fs::create_dir_all(p).map_err(|e| DataError::io(p, e));
        mkdir(&dir.join("bars"))?;
        mkdir(&dir.join("news"))?;
        let assets = dir.join("assets.csv");
        let mut text = String::from("symbol,sector\n");
        for (s, sector) in &self.sectors {
            text.push_str(&format!("{s},{sector}\n"));
        }
        std::fs::write(&assets, text).map_err(|e| DataError::io(&assets, e))?;
        let mut by_symbol: BTreeMap<&str, Vec<Bar>> = BTreeMap::new();
        for b in &self.bars {
            by_symbol.entry(b.symbol.as_str()).or_default().push(b.clone());
        }
        for (s, bars) in by_symbol {
            save_bars(&bars, &dir.join("bars").join(format!("{s}.csv")))?;
        }
        let path = dir.join("news").join("news.jsonl");
        let mut f = std::fs::File::create(&path).map_err(|e| DataError::io(&path, e))?;
        for n in &self.news {
            let line = serde_json::to_string(n).expect("news serializes");
            writeln!(f, "{line}").map_err(|e| DataError::io(&path, e))?;
        }
        Ok(())
    }
}

/// A dataset from explicit close paths on consecutive weekdays. Open equals the previous
/// close, high/low bracket the day by 0.5%, volume is constant; every symbol is placed
/// in one sector.
pub fn from_closes(series: &[(&str, Vec<f64>)], start: NaiveDate) -> Result<Dataset> {
    let n = series.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
    let dates = weekdays(start, n);
    let mut bars = Vec::new();
    let mut sectors = BTreeMap::new();
    for (s, closes) in series {
        sectors.insert(s.to_string(), SECTORS[0].to_string());
        for (i, c) in closes.iter().enumerate() {
            let open = if i == 0 { *c } else { closes[i - 1] };
            bars.push(Bar {
                symbol: s.to_string(),
                date: dates[i],
                open,
                high: open.max(*c) * 1.005,
                low: open.min(*c) * 0.995,
                close: *c,
                volume: 1_000_000,
                adjusted_close: None,
            });
        }
    }
    Dataset::new(bars, Vec::new(), sectors)
}
