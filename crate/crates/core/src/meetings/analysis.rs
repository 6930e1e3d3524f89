//! Deterministic analyst inputs: the figures each contribution is built on.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::{round6, Result};
use crate::indicators::{compute_raw, IndicatorSpec, Ohlcv};
use crate::marketdata::MarketView;

fn last_defined(spec: &IndicatorSpec, data: &Ohlcv) -> Result<Option<f64>> {
    let raw = compute_raw(spec, data)?;
    Ok(raw[0].last().copied().filter(|v| v.is_finite()))
}

/// Breadth and oscillator readings across the symbols that traded at the cursor: share
/// above their 20-day SMA, mean RSI(14) and the overbought/oversold lists.
pub fn market_overview(view: &MarketView) -> Result<Value> {
    let rsi: IndicatorSpec = "RSI(n=14)".parse()?;
    let sma: IndicatorSpec = "SMA(n=20)".parse()?;
    let mut above = 0usize;
    let mut with_sma = 0usize;
    let mut rsis = Vec::new();
    let mut overbought = Vec::new();
    let mut oversold = Vec::new();
    for s in view.universe() {
        if view.bar_at_cursor(s).is_none() {
            continue;
        }
        let data = Ohlcv::from_bars(view.history(s), view.price_field());
        let close = data.close[data.len() - 1];
        if let Some(m) = last_defined(&sma, &data)? {
            with_sma += 1;
            if close > m {
                above += 1;
            }
        }
        if let Some(r) = last_defined(&rsi, &data)? {
            rsis.push(r);
            if r > 70.0 {
                overbought.push(s.clone());
            } else if r < 30.0 {
                oversold.push(s.clone());
            }
        }
    }
    let mean = |v: &[f64]| if v.is_empty() { Value::Null } else { json!(round6(v.iter().sum::<f64>() / v.len() as f64)) };
    Ok(json!({
        "breadth_above_sma20": if with_sma == 0 { Value::Null } else { json!(round6(above as f64 / with_sma as f64)) },
        "mean_rsi14": mean(&rsis),
        "overbought": overbought,
        "oversold": oversold,
    }))
}

/// Cross-sectional trend over `lookback` sessions: leaders, laggards, share advancing,
/// dispersion and per-sector mean return.
pub fn trend_summary(view: &MarketView, lookback: usize) -> Result<Value> {
    let mut rets: Vec<(String, f64)> = Vec::new();
    for s in view.universe() {
        let p = view.signal_prices(s);
        if view.bar_at_cursor(s).is_none() || p.len() <= lookback {
            continue;
        }
        rets.push((s.clone(), p[p.len() - 1] / p[p.len() - 1 - lookback] - 1.0));
    }
    rets.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let entry = |(s, r): &(String, f64)| json!({"symbol": s, "return": round6(*r)});
    let n = rets.len();
    let mut sectors: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for (s, r) in &rets {
        let e = sectors.entry(view.sector(s).unwrap_or("unknown").to_string()).or_default();
        e.0 += r;
        e.1 += 1;
    }
    let dispersion = if n < 2 {
        Value::Null
    } else {
        let m = rets.iter().map(|r| r.1).sum::<f64>() / n as f64;
        json!(round6((rets.iter().map(|r| (r.1 - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()))
    };
    Ok(json!({
        "lookback": lookback,
        "leaders": rets.iter().take(3).map(entry).collect::<Vec<_>>(),
        "laggards": rets.iter().rev().take(3).map(entry).collect::<Vec<_>>(),
        "advancing": if n == 0 { Value::Null } else { json!(round6(rets.iter().filter(|r| r.1 > 0.0).count() as f64 / n as f64)) },
        "dispersion": dispersion,
        "sectors": sectors.into_iter().map(|(k, (s, c))| (k, json!(round6(s / c as f64)))).collect::<BTreeMap<_, _>>(),
    }))
}
