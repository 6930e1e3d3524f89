//! Deliberately naive reference implementations of every catalog indicator.
//!
//! Each one recomputes its windows from scratch at every index, works with `Option`
//! rather than NaN, and uses closed-form sums for the linear recursions (EMA, ADX,
//! ADXR). Nothing here calls into the crate's kernels.

#![allow(dead_code)]

use fundsim_core::indicators::{IndicatorSpec, Ohlcv, ParamValue};

pub type S = Vec<Option<f64>>;

fn num(spec: &IndicatorSpec, key: &str) -> f64 {
    match spec.params().get(key) {
        Some(ParamValue::Num(x)) => *x,
        other => panic!("{}: param {key} missing or not numeric: {other:?}", spec.name()),
    }
}

fn int(spec: &IndicatorSpec, key: &str) -> usize {
    num(spec, key) as usize
}

fn word<'a>(spec: &'a IndicatorSpec, key: &str) -> &'a str {
    match spec.params().get(key) {
        Some(ParamValue::Word(w)) => w,
        other => panic!("{}: param {key} missing or not a word: {other:?}", spec.name()),
    }
}

fn some(x: &[f64]) -> S {
    x.iter().map(|v| Some(*v)).collect()
}

fn win(x: &S, t: usize, n: usize) -> Option<Vec<f64>> {
    if n == 0 || t + 1 < n {
        return None;
    }
    let mut out = Vec::with_capacity(n);
    for i in t + 1 - n..=t {
        out.push(x[i]?);
    }
    Some(out)
}

fn avg(w: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in w {
        s += v;
    }
    s / w.len() as f64
}

fn svar(w: &[f64]) -> f64 {
    let m = avg(w);
    let mut s = 0.0;
    for v in w {
        s += (v - m) * (v - m);
    }
    s / (w.len() - 1) as f64
}

fn hi(w: &[f64]) -> f64 {
    let mut m = w[0];
    for v in w {
        if *v > m {
            m = *v;
        }
    }
    m
}

fn lo(w: &[f64]) -> f64 {
    let mut m = w[0];
    for v in w {
        if *v < m {
            m = *v;
        }
    }
    m
}

pub fn o_sma(x: &S, n: usize) -> S {
    (0..x.len()).map(|t| win(x, t, n).map(|w| avg(&w))).collect()
}

/// Closed form of the 1/(n+1) exponential average seeded by the first-window mean.
pub fn o_ema(x: &S, n: usize) -> S {
    let len = x.len();
    let mut out = vec![None; len];
    let Some(first) = x.iter().position(Option::is_some) else {
        return out;
    };
    if first + n > len {
        return out;
    }
    let s = first + n - 1;
    let seed = avg(&x[first..=s].iter().map(|v| v.unwrap()).collect::<Vec<_>>());
    let a = 1.0 / (n as f64 + 1.0);
    for t in s..len {
        let mut v = (1.0 - a).powi((t - s) as i32) * seed;
        for j in s + 1..=t {
            v += a * (1.0 - a).powi((t - j) as i32) * x[j].unwrap();
        }
        out[t] = Some(v);
    }
    out
}

fn o_max(x: &S, n: usize) -> S {
    (0..x.len()).map(|t| win(x, t, n).map(|w| hi(&w))).collect()
}

fn o_min(x: &S, n: usize) -> S {
    (0..x.len()).map(|t| win(x, t, n).map(|w| lo(&w))).collect()
}

fn o_std(x: &S, n: usize) -> S {
    (0..x.len()).map(|t| win(x, t, n).map(|w| svar(&w).sqrt())).collect()
}

fn map2(a: &S, b: &S, f: impl Fn(f64, f64) -> f64) -> S {
    a.iter().zip(b).map(|(x, y)| Some(f((*x)?, (*y)?))).collect()
}

fn typical(d: &Ohlcv) -> S {
    (0..d.len()).map(|t| Some((d.close[t] + d.high[t] + d.low[t]) / 3.0)).collect()
}

fn tr(d: &Ohlcv) -> S {
    (0..d.len())
        .map(|t| {
            if t == 0 {
                return None;
            }
            let terms = [
                d.high[t] - d.low[t],
                (d.high[t] - d.close[t - 1]).abs(),
                (d.low[t] - d.close[t - 1]).abs(),
            ];
            Some(hi(&terms))
        })
        .collect()
}

fn roc(c: &[f64], n: usize) -> S {
    (0..c.len())
        .map(|t| (t >= n).then(|| (c[t] - c[t - n]) / c[t - n] * 100.0))
        .collect()
}

fn ups(c: &[f64], from: usize, to: usize) -> usize {
    let mut k = 0;
    for i in from..=to {
        if c[i] > c[i - 1] {
            k += 1;
        }
    }
    k
}

fn rsi(c: &[f64], n: usize) -> S {
    (0..c.len())
        .map(|t| {
            if t < n {
                return None;
            }
            let mut gains = Vec::new();
            let mut losses = Vec::new();
            for i in t + 1 - n..=t {
                let dlt = c[i] - c[i - 1];
                gains.push(if dlt > 0.0 { dlt } else { 0.0 });
                losses.push(if dlt < 0.0 { -dlt } else { 0.0 });
            }
            let g = avg(&gains);
            let l = avg(&losses);
            Some(match (g == 0.0, l == 0.0) {
                (true, true) => 50.0,
                (false, true) => 100.0,
                (true, false) => 0.0,
                _ => 100.0 - 100.0 / (1.0 + g / l),
            })
        })
        .collect()
}

fn rsv(d: &Ohlcv, n: usize) -> S {
    let h = some(&d.high);
    let l = some(&d.low);
    (0..d.len())
        .map(|t| {
            let hh = hi(&win(&h, t, n)?);
            let ll = lo(&win(&l, t, n)?);
            Some(if hh == ll { 50.0 } else { (d.close[t] - ll) / (hh - ll) * 100.0 })
        })
        .collect()
}

fn balance(d: &Ohlcv, n: usize) -> S {
    (0..d.len())
        .map(|t| {
            if t < n {
                return None;
            }
            let mut up = 0.0;
            let mut dn = 0.0;
            for i in t + 1 - n..=t {
                if d.close[i] > d.close[i - 1] {
                    up += d.volume[i];
                }
                if d.close[i] < d.close[i - 1] {
                    dn += d.volume[i];
                }
            }
            Some(if up + dn == 0.0 { 0.0 } else { (up - dn) / (up + dn) * 100.0 })
        })
        .collect()
}

fn dmi(d: &Ohlcv, n: usize) -> (S, S, S) {
    let len = d.len();
    let trs = tr(d);
    let (mut p, mut m, mut x) = (vec![None; len], vec![None; len], vec![None; len]);
    for t in n..len {
        let (mut sp, mut sm, mut st) = (0.0, 0.0, 0.0);
        for i in t + 1 - n..=t {
            let up = d.high[i] - d.high[i - 1];
            let down = d.low[i - 1] - d.low[i];
            if up > down && up > 0.0 {
                sp += up;
            }
            if down > up && down > 0.0 {
                sm += down;
            }
            st += trs[i].unwrap();
        }
        let (pv, mv) = if st == 0.0 { (0.0, 0.0) } else { (100.0 * sp / st, 100.0 * sm / st) };
        p[t] = Some(pv);
        m[t] = Some(mv);
        x[t] = Some(if pv + mv == 0.0 { 0.0 } else { 100.0 * (pv - mv).abs() / (pv + mv) });
    }
    (p, m, x)
}

/// Closed form of `y_t = (k * y_{t-1} + x_t)/(k+1)` seeded by the mean of the first `k` x values.
fn adx(d: &Ohlcv, n: usize) -> S {
    let (_, _, dx) = dmi(d, n);
    let len = d.len();
    let mut out = vec![None; len];
    let first = n;
    let s = first + n - 1;
    if s >= len {
        return out;
    }
    let seed = avg(&(first..=s).map(|i| dx[i].unwrap()).collect::<Vec<_>>());
    let r = n as f64 / (n as f64 + 1.0);
    for t in s..len {
        let mut v = r.powi((t - s) as i32) * seed;
        for j in s + 1..=t {
            v += r.powi((t - j) as i32) * dx[j].unwrap() / (n as f64 + 1.0);
        }
        out[t] = Some(v);
    }
    out
}

fn adxr(d: &Ohlcv, n: usize) -> S {
    let a = adx(d, n);
    let len = d.len();
    let mut out = vec![None; len];
    let Some(s) = a.iter().position(Option::is_some) else {
        return out;
    };
    for t in s..len {
        let mut v = 0.5f64.powi((t - s) as i32) * a[s].unwrap();
        for j in s + 1..=t {
            v += 0.5f64.powi((t - j + 1) as i32) * a[j].unwrap();
        }
        out[t] = Some(v);
    }
    out
}

fn kama(d: &Ohlcv, n: usize, fast: usize, slow: usize) -> S {
    let c = &d.close;
    let len = c.len();
    let mut out = vec![None; len];
    if n > len {
        return out;
    }
    let fsc = 2.0 / (fast as f64 + 1.0);
    let ssc = 2.0 / (slow as f64 + 1.0);
    out[n - 1] = Some(c[n - 1]);
    for t in n..len {
        let mut vol = 0.0;
        for i in t - n + 1..=t {
            vol += (c[i] - c[i - 1]).abs();
        }
        let er = if vol == 0.0 { 0.0 } else { (c[t] - c[t - n]).abs() / vol };
        let sc = (er * (fsc - ssc) + ssc) * (er * (fsc - ssc) + ssc);
        let prev = out[t - 1].unwrap();
        out[t] = Some(prev + sc * (c[t] - prev));
    }
    out
}

fn supertrend(d: &Ohlcv, n: usize, mult: f64) -> (S, S, S) {
    let len = d.len();
    let atr = o_sma(&tr(d), n);
    let (mut st, mut up, mut lw) = (vec![None; len], vec![None; len], vec![None; len]);
    let mut long = false;
    for t in 0..len {
        let Some(a) = atr[t] else { continue };
        let bu = d.close[t - 1] + mult * a;
        let bl = d.close[t - 1] - mult * a;
        match (up[t - 1], lw[t - 1]) {
            (Some(pu), Some(pl)) => {
                let u: f64 = if bu < pu || d.close[t - 1] > pu { bu } else { pu };
                let l: f64 = if bl > pl || d.close[t - 1] < pl { bl } else { pl };
                long = if long { !(d.close[t] < l) } else { d.close[t] > u };
                up[t] = Some(u);
                lw[t] = Some(l);
            }
            _ => {
                up[t] = Some(bu);
                lw[t] = Some(bl);
                long = d.close[t] > bu;
            }
        }
        st[t] = if long { lw[t] } else { up[t] };
    }
    (st, up, lw)
}

fn qqe(d: &Ohlcv, n: usize, smooth: usize, factor: f64) -> (S, S) {
    let len = d.len();
    let rma = o_ema(&rsi(&d.close, n), smooth);
    let moves: S = (0..len)
        .map(|t| if t == 0 { None } else { Some((rma[t]? - rma[t - 1]?).abs()) })
        .collect();
    let w = 2 * n - 1;
    let dar: S = o_ema(&o_ema(&moves, w), w).iter().map(|v| v.map(|x| x * factor)).collect();
    let mut trail = vec![None; len];
    let mut bands: Option<(f64, f64, bool)> = None;
    for t in 0..len {
        let Some(width) = dar[t] else { continue };
        let r = rma[t].unwrap();
        bands = Some(match bands {
            None => (r - width, r + width, true),
            Some((lb, sb, long)) => {
                let rp = rma[t - 1].unwrap();
                let lb2 = if rp > lb && r > lb { lb.max(r - width) } else { r - width };
                let sb2 = if rp < sb && r < sb { sb.min(r + width) } else { r + width };
                let long2 = if r > sb {
                    true
                } else if r < lb {
                    false
                } else {
                    long
                };
                (lb2, sb2, long2)
            }
        });
        let (lb, sb, long) = bands.unwrap();
        trail[t] = Some(if long { lb } else { sb });
    }
    (rma, trail)
}

/// Reference lines for `spec` (all parameters must be explicit, e.g. from a template).
pub fn reference(spec: &IndicatorSpec, d: &Ohlcv) -> Vec<S> {
    let c = some(&d.close);
    let h = some(&d.high);
    let l = some(&d.low);
    let len = d.len();
    let per_t = |f: &dyn Fn(usize) -> Option<f64>| -> S { (0..len).map(f).collect() };
    match spec.name() {
        "DELTA" => {
            let n = int(spec, "n");
            vec![per_t(&|t| (t >= n).then(|| d.close[t] - d.close[t - n]))]
        }
        "PERMUTATION" => {
            let n = int(spec, "n");
            vec![per_t(&|t| win(&c, t, n).map(|w| w.iter().filter(|v| **v < d.close[t]).count() as f64))]
        }
        "LOG_RETURN" => vec![per_t(&|t| (t >= 1).then(|| (d.close[t] / d.close[t - 1]).ln()))],
        "MAX" => vec![o_max(&c, int(spec, "n"))],
        "MIN" => vec![o_min(&c, int(spec, "n"))],
        "MIDDLE" => vec![typical(d)],
        "COMPARE" => {
            let n = int(spec, "n");
            let op = word(spec, "op").to_string();
            vec![per_t(&|t| {
                if t < n {
                    return None;
                }
                let (a, b) = (d.close[t], d.close[t - n]);
                let hit = match op.as_str() {
                    "le" => a <= b,
                    "ge" => a >= b,
                    "lt" => a < b,
                    "gt" => a > b,
                    "eq" => a == b,
                    _ => a != b,
                };
                Some(if hit { 1.0 } else { 0.0 })
            })]
        }
        "COUNT" => {
            let n = int(spec, "n");
            let forward = word(spec, "direction") == "forward";
            vec![per_t(&|t| {
                if forward {
                    (t + n < len).then(|| ups(&d.close, t + 1, t + n) as f64)
                } else {
                    (t >= n).then(|| ups(&d.close, t + 1 - n, t) as f64)
                }
            })]
        }
        "CROSS" => {
            let f = o_sma(&c, int(spec, "fast"));
            let s = o_sma(&c, int(spec, "slow"));
            let up = word(spec, "direction") == "up";
            vec![per_t(&|t| {
                if t == 0 {
                    return None;
                }
                let now = f[t]? - s[t]?;
                let before = f[t - 1]? - s[t - 1]?;
                let hit = if up { before <= 0.0 && now > 0.0 } else { before >= 0.0 && now < 0.0 };
                Some(if hit { 1.0 } else { 0.0 })
            })]
        }
        "SMA" => vec![o_sma(&c, int(spec, "n"))],
        "EMA" => vec![o_ema(&c, int(spec, "n"))],
        "MSTD" => vec![o_std(&c, int(spec, "n"))],
        "MVAR" => {
            let n = int(spec, "n");
            vec![per_t(&|t| win(&c, t, n).map(|w| svar(&w)))]
        }
        "RSV" => vec![rsv(d, int(spec, "n"))],
        "RSI" => vec![rsi(&d.close, int(spec, "n"))],
        "KDJ" => {
            let m = int(spec, "smooth");
            let k = o_sma(&rsv(d, int(spec, "n")), m);
            let dd = o_sma(&k, m);
            let j = map2(&k, &dd, |a, b| 3.0 * a - 2.0 * b);
            vec![k, dd, j]
        }
        "BOLL" => {
            let n = int(spec, "n");
            let k = num(spec, "k");
            let mid = o_sma(&c, n);
            let sd = o_std(&c, n);
            vec![mid.clone(), map2(&mid, &sd, |m, s| m + k * s), map2(&mid, &sd, |m, s| m - k * s)]
        }
        "MACD" => {
            let macd = map2(&o_ema(&c, int(spec, "fast")), &o_ema(&c, int(spec, "slow")), |a, b| a - b);
            let sig = o_ema(&macd, int(spec, "signal"));
            let hist = map2(&macd, &sig, |a, b| a - b);
            vec![macd, sig, hist]
        }
        "CR" => {
            let n = int(spec, "n");
            let tp = typical(d);
            vec![per_t(&|t| {
                let mids = win(&tp, t, n)?;
                let mut num = 0.0;
                let mut den = 0.0;
                for (k, i) in (t + 1 - n..=t).enumerate() {
                    num += mids[k];
                    den += d.high[i] - d.low[i];
                }
                (den != 0.0).then(|| num / den)
            })]
        }
        "WR" => {
            let n = int(spec, "n");
            vec![per_t(&|t| {
                let hh = hi(&win(&h, t, n)?);
                let ll = lo(&win(&l, t, n)?);
                Some(if hh == ll { -50.0 } else { (hh - d.close[t]) / (hh - ll) * -100.0 })
            })]
        }
        "CCI" => {
            let n = int(spec, "n");
            let tp = typical(d);
            vec![per_t(&|t| {
                let w = win(&tp, t, n)?;
                let m = avg(&w);
                let md = avg(&w.iter().map(|v| (v - m).abs()).collect::<Vec<_>>());
                Some(if md == 0.0 { 0.0 } else { (tp[t].unwrap() - m) / (md / 0.015) })
            })]
        }
        "TR" => vec![tr(d)],
        "ATR" => vec![o_sma(&tr(d), int(spec, "n"))],
        "DMA" => vec![map2(&o_sma(&c, int(spec, "fast")), &o_sma(&c, int(spec, "slow")), |a, b| a - b)],
        "DMI" => {
            let (p, m, x) = dmi(d, int(spec, "n"));
            vec![p, m, x]
        }
        "PDI" | "MDI" => {
            let n = int(spec, "n");
            let trs = tr(d);
            let plus = spec.name() == "PDI";
            vec![per_t(&|t| {
                if t < n {
                    return None;
                }
                let ll = lo(&d.low[t - n..t]);
                let r = trs[t]?;
                Some(if r == 0.0 {
                    0.0
                } else if plus {
                    (d.high[t] - ll) / r
                } else {
                    (ll - d.low[t]) / r
                })
            })]
        }
        "ADX" => vec![adx(d, int(spec, "n"))],
        "ADXR" => vec![adxr(d, int(spec, "n"))],
        "TRIX" => {
            let n = int(spec, "n");
            let e3 = o_ema(&o_ema(&o_ema(&c, n), n), n);
            vec![per_t(&|t| if t == 0 { None } else { Some((e3[t]? - e3[t - 1]?) / e3[t - 1]? * 100.0) })]
        }
        "TEMA" => {
            let n = int(spec, "n");
            let e1 = o_ema(&c, n);
            let e2 = o_ema(&e1, n);
            let e3 = o_ema(&e2, n);
            vec![per_t(&|t| Some(3.0 * e1[t]? - 3.0 * e2[t]? + e3[t]?))]
        }
        "VR" | "PVO" => vec![balance(d, int(spec, "n"))],
        "MFI" => {
            let n = int(spec, "n");
            let tp = typical(d);
            let flow: S = (0..len).map(|t| Some(tp[t].unwrap() * d.volume[t])).collect();
            vec![per_t(&|t| {
                let a = avg(&win(&flow, t, n)?);
                Some(if a == 0.0 { 100.0 } else { flow[t].unwrap() / a * 100.0 })
            })]
        }
        "VWMA" => {
            let n = int(spec, "n");
            vec![per_t(&|t| {
                if t + 1 < n {
                    return None;
                }
                let mut pv = 0.0;
                let mut v = 0.0;
                let mut p = 0.0;
                for i in t + 1 - n..=t {
                    pv += d.close[i] * d.volume[i];
                    v += d.volume[i];
                    p += d.close[i];
                }
                Some(if v == 0.0 { p / n as f64 } else { pv / v })
            })]
        }
        "CHOP" => {
            let n = int(spec, "n");
            let trs = tr(d);
            vec![per_t(&|t| {
                let w = win(&trs, t, n)?;
                let hh = hi(&d.high[t + 1 - n..=t]);
                let ll = lo(&d.low[t + 1 - n..=t]);
                let total: f64 = w.iter().sum();
                Some(if hh == ll { 100.0 } else { 100.0 * (total / (hh - ll)).log10() / (n as f64).log10() })
            })]
        }
        "KER" => {
            let n = int(spec, "n");
            vec![per_t(&|t| {
                let hh = hi(&win(&h, t, n)?);
                let ll = lo(&win(&l, t, n)?);
                Some((hh - ll) / hh)
            })]
        }
        "KAMA" => vec![kama(d, int(spec, "n"), int(spec, "fast"), int(spec, "slow"))],
        "PPO" => {
            let f = o_ema(&c, int(spec, "fast"));
            let s = o_ema(&c, int(spec, "slow"));
            vec![map2(&f, &s, |a, b| (a - b) / b * 100.0)]
        }
        "STOCHRSI" => {
            let r = rsi(&d.close, int(spec, "n"));
            let m = int(spec, "m");
            let k: S = (0..len)
                .map(|t| {
                    let w = win(&r, t, m)?;
                    let (a, b) = (lo(&w), hi(&w));
                    Some(if a == b { 50.0 } else { (r[t].unwrap() - a) / (b - a) * 100.0 })
                })
                .collect();
            let dd = o_sma(&k, int(spec, "d"));
            vec![k, dd]
        }
        "WT" => {
            let n1 = int(spec, "channel");
            let ap = typical(d);
            let esa = o_ema(&ap, n1);
            let dev: S = (0..len).map(|t| Some((ap[t]? - esa[t]?).abs())).collect();
            let dd = o_ema(&dev, n1);
            let ci: S = (0..len)
                .map(|t| {
                    let dv = dd[t]?;
                    Some(if dv == 0.0 { 0.0 } else { (ap[t]? - esa[t]?) / (0.015 * dv) })
                })
                .collect();
            let wt1 = o_ema(&ci, int(spec, "average"));
            let wt2 = o_sma(&wt1, int(spec, "signal"));
            vec![wt1, wt2]
        }
        "SUPERTREND" => {
            let (a, b, c) = supertrend(d, int(spec, "n"), num(spec, "mult"));
            vec![a, b, c]
        }
        "AROON" => {
            let n = int(spec, "n");
            let mut up = vec![None; len];
            let mut dn = vec![None; len];
            let mut osc = vec![None; len];
            for t in n..len {
                // bars since the extreme, most recent occurrence on ties
                let mut since_hi = n;
                let mut since_lo = n;
                for back in 0..=n {
                    let i = t - back;
                    if d.high[i] == hi(&d.high[t - n..=t]) && back < since_hi {
                        since_hi = back;
                    }
                    if d.low[i] == lo(&d.low[t - n..=t]) && back < since_lo {
                        since_lo = back;
                    }
                }
                let u = 100.0 * (n - since_hi) as f64 / n as f64;
                let w = 100.0 * (n - since_lo) as f64 / n as f64;
                up[t] = Some(u);
                dn[t] = Some(w);
                osc[t] = Some(u - w);
            }
            vec![up, dn, osc]
        }
        "ZSCORE" => {
            let n = int(spec, "n");
            vec![per_t(&|t| {
                let w = win(&c, t, n)?;
                let sd = svar(&w).sqrt();
                Some(if sd == 0.0 { 0.0 } else { (d.close[t] - avg(&w)) / sd })
            })]
        }
        "AO" => {
            let med: S = (0..len).map(|t| Some((d.high[t] + d.low[t]) / 2.0)).collect();
            vec![map2(&o_sma(&med, int(spec, "fast")), &o_sma(&med, int(spec, "slow")), |a, b| a - b)]
        }
        "BOP" => vec![per_t(&|t| {
            let r = d.high[t] - d.low[t];
            Some(if r == 0.0 { 0.0 } else { (d.close[t] - d.open[t]) / r * d.volume[t] })
        })],
        "MAD" => {
            let n = int(spec, "n");
            vec![per_t(&|t| {
                let w = win(&c, t, n)?;
                let m = avg(&w);
                Some(avg(&w.iter().map(|v| (v - m).abs()).collect::<Vec<_>>()))
            })]
        }
        "ROC" => vec![roc(&d.close, int(spec, "n"))],
        "COPPOCK" => {
            let a = roc(&d.close, int(spec, "long"));
            let b = roc(&d.close, int(spec, "short"));
            vec![map2(&a, &b, |x, y| (x + 0.15 * y) / (1.0 + 0.15))]
        }
        "ICHIMOKU" => {
            let mid = |n: usize| -> S {
                (0..len).map(|t| Some((hi(&win(&h, t, n)?) + lo(&win(&l, t, n)?)) / 2.0)).collect()
            };
            let conv = mid(int(spec, "conversion"));
            let base = mid(int(spec, "base"));
            let span_a = map2(&conv, &base, |a, b| (a + b) / 2.0);
            vec![conv, base, span_a, mid(int(spec, "span"))]
        }
        "CTI" => {
            let f = o_sma(&c, int(spec, "fast"));
            let s = o_sma(&c, int(spec, "slow"));
            vec![map2(&f, &s, |a, b| (a - b) / (a + b))]
        }
        "LRMA" => {
            let n = int(spec, "n");
            vec![per_t(&|t| {
                let w = win(&c, t, n)?;
                // normal equations for y = b0 + b1 x, x = 0..n-1
                let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
                for (i, y) in w.iter().enumerate() {
                    let x = i as f64;
                    sx += x;
                    sy += y;
                    sxx += x * x;
                    sxy += x * y;
                }
                let nf = n as f64;
                let b1 = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);
                let b0 = (sy - b1 * sx) / nf;
                Some(b0 + b1 * (nf - 1.0))
            })]
        }
        "ERI" => vec![
            per_t(&|t| Some((d.high[t] + d.low[t] + d.close[t]) / 3.0)),
            per_t(&|t| Some((d.high[t] + d.low[t] - d.close[t]) / 3.0)),
        ],
        "FTR" => vec![per_t(&|t| Some(((d.high[t] + d.low[t]) / 2.0).ln()))],
        "RVGI" => {
            let f = o_sma(&c, int(spec, "fast"));
            let s = o_sma(&c, int(spec, "slow"));
            vec![map2(&f, &s, |a, b| (a - b) / b * 100.0)]
        }
        "INERTIA" => vec![roc(&d.close, 1)],
        "KST" => {
            let parts: Vec<S> = (1..=4)
                .map(|i| o_sma(&roc(&d.close, int(spec, &format!("roc{i}"))), int(spec, &format!("sma{i}"))))
                .collect();
            vec![per_t(&|t| Some(parts[0][t]? + parts[1][t]? + parts[2][t]? + parts[3][t]?))]
        }
        "PGO" => vec![map2(&c, &o_sma(&c, int(spec, "n")), |a, b| a - b)],
        "PSL" => {
            let n = int(spec, "n");
            vec![per_t(&|t| (t >= n).then(|| ups(&d.close, t + 1 - n, t) as f64 * 100.0 / n as f64))]
        }
        "QQE" => {
            let (a, b) = qqe(d, int(spec, "n"), int(spec, "smooth"), num(spec, "factor"));
            vec![a, b]
        }
        other => panic!("no reference implementation for {other}"),
    }
}

/// Outcome of comparing one line against its reference.
#[derive(Debug, Default)]
pub struct LineCheck {
    pub defined_mismatch: Option<usize>,
    pub worst_rel: f64,
    pub worst_index: usize,
}

/// Relative error with the scale taken as the larger magnitude of the pair, floored at a
/// billionth of the line's own magnitude so that values crossing zero are judged against
/// the size of the quantity rather than against zero.
pub fn check_line(got: &[Option<f64>], want: &[Option<f64>]) -> LineCheck {
    let line_scale = want.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = LineCheck::default();
    for (i, (g, w)) in got.iter().zip(want).enumerate() {
        match (g, w) {
            (Some(a), Some(b)) => {
                let denom = a.abs().max(b.abs()).max(line_scale * 1e-9).max(f64::MIN_POSITIVE);
                let rel = (a - b).abs() / denom;
                if rel > out.worst_rel {
                    out.worst_rel = rel;
                    out.worst_index = i;
                }
            }
            (None, None) => {}
            _ => {
                if out.defined_mismatch.is_none() {
                    out.defined_mismatch = Some(i);
                }
            }
        }
    }
    if got.len() != want.len() {
        out.defined_mismatch = Some(got.len().min(want.len()));
    }
    out
}
