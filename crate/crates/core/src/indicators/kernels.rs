//! Indicator kernels over NaN-coded columns. NaN marks an undefined point; the public
//! API converts it to `None`.

use super::spec::Params;
use super::Ohlcv;

pub(crate) type Lines = Vec<Vec<f64>>;

const NAN: f64 = f64::NAN;

fn window(x: &[f64], t: usize, n: usize) -> Option<&[f64]> {
    if n == 0 || t + 1 < n {
        return None;
    }
    let w = &x[t + 1 - n..=t];
    if w.iter().any(|v| v.is_nan()) {
        None
    } else {
        Some(w)
    }
}

fn rolling(x: &[f64], n: usize, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..x.len()).map(|t| window(x, t, n).map(&f).unwrap_or(NAN)).collect()
}

fn mean(w: &[f64]) -> f64 {
    w.iter().sum::<f64>() / w.len() as f64
}

fn sample_var(w: &[f64]) -> f64 {
    let m = mean(w);
    w.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (w.len() - 1) as f64
}

fn max_of(w: &[f64]) -> f64 {
    w.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(w: &[f64]) -> f64 {
    w.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Simple moving average over the trailing `n` points.
pub fn sma(x: &[f64], n: usize) -> Vec<f64> {
    rolling(x, n, mean)
}

/// Exponential moving average with smoothing `1/(n+1)`, seeded by the mean of the first
/// `n` defined inputs. Leading NaNs in `x` are skipped.
pub fn ema(x: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![NAN; x.len()];
    let Some(first) = x.iter().position(|v| !v.is_nan()) else {
        return out;
    };
    if n == 0 || first + n > x.len() {
        return out;
    }
    let alpha = 1.0 / (n as f64 + 1.0);
    let seed_at = first + n - 1;
    let mut prev = mean(&x[first..=seed_at]);
    out[seed_at] = prev;
    for t in seed_at + 1..x.len() {
        prev += (x[t] - prev) * alpha;
        out[t] = prev;
    }
    out
}

pub fn rolling_max(x: &[f64], n: usize) -> Vec<f64> {
    rolling(x, n, max_of)
}

pub fn rolling_min(x: &[f64], n: usize) -> Vec<f64> {
    rolling(x, n, min_of)
}

/// Sample (N−1) standard deviation over the trailing `n` points.
pub fn stdev(x: &[f64], n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![NAN; x.len()];
    }
    rolling(x, n, |w| sample_var(w).sqrt())
}

fn zip(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}

/// `f(x[t], x[t-lag])` for `t >= lag`.
fn lagged(x: &[f64], lag: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    (0..x.len())
        .map(|t| if t >= lag { f(x[t], x[t - lag]) } else { NAN })
        .collect()
}

fn middle(d: &Ohlcv) -> Vec<f64> {
    (0..d.len()).map(|t| (d.close[t] + d.high[t] + d.low[t]) / 3.0).collect()
}

fn true_range(d: &Ohlcv) -> Vec<f64> {
    (0..d.len())
        .map(|t| {
            if t == 0 {
                return NAN;
            }
            let pc = d.close[t - 1];
            (d.high[t] - d.low[t])
                .max((d.high[t] - pc).abs())
                .max((d.low[t] - pc).abs())
        })
        .collect()
}

fn up_day(c: &[f64], i: usize) -> bool {
    c[i] > c[i - 1]
}

fn roc_of(c: &[f64], n: usize) -> Vec<f64> {
    lagged(c, n, |a, b| (a - b) / b * 100.0)
}

fn rsi_of(c: &[f64], n: usize) -> Vec<f64> {
    (0..c.len())
        .map(|t| {
            if t < n {
                return NAN;
            }
            let (mut gain, mut loss) = (0.0, 0.0);
            for i in t + 1 - n..=t {
                let delta = c[i] - c[i - 1];
                if delta > 0.0 {
                    gain += delta;
                } else {
                    loss -= delta;
                }
            }
            let (g, l) = (gain / n as f64, loss / n as f64);
            if l == 0.0 {
                if g == 0.0 {
                    50.0
                } else {
                    100.0
                }
            } else if g == 0.0 {
                0.0
            } else {
                100.0 - 100.0 / (1.0 + g / l)
            }
        })
        .collect()
}

fn rsv_of(d: &Ohlcv, n: usize) -> Vec<f64> {
    let hh = rolling_max(&d.high, n);
    let ll = rolling_min(&d.low, n);
    (0..d.len())
        .map(|t| {
            let range = hh[t] - ll[t];
            if range.is_nan() {
                NAN
            } else if range == 0.0 {
                50.0
            } else {
                (d.close[t] - ll[t]) / range * 100.0
            }
        })
        .collect()
}

/// Up-volume minus down-volume over up-plus-down volume, in percent.
fn volume_balance(d: &Ohlcv, n: usize) -> Vec<f64> {
    (0..d.len())
        .map(|t| {
            if t < n {
                return NAN;
            }
            let (mut up, mut down) = (0.0, 0.0);
            for i in t + 1 - n..=t {
                if d.close[i] > d.close[i - 1] {
                    up += d.volume[i];
                } else if d.close[i] < d.close[i - 1] {
                    down += d.volume[i];
                }
            }
            if up + down == 0.0 {
                0.0
            } else {
                (up - down) / (up + down) * 100.0
            }
        })
        .collect()
}

/// Directional movement: (+DM, -DM) per bar, undefined at index 0.
fn directional_moves(d: &Ohlcv) -> (Vec<f64>, Vec<f64>) {
    let mut plus = vec![NAN; d.len()];
    let mut minus = vec![NAN; d.len()];
    for t in 1..d.len() {
        let up = d.high[t] - d.high[t - 1];
        let down = d.low[t - 1] - d.low[t];
        plus[t] = if up > down && up > 0.0 { up } else { 0.0 };
        minus[t] = if down > up && down > 0.0 { down } else { 0.0 };
    }
    (plus, minus)
}

fn dmi_lines(d: &Ohlcv, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (plus, minus) = directional_moves(d);
    let tr = true_range(d);
    let sp = rolling(&plus, n, |w| w.iter().sum());
    let sm = rolling(&minus, n, |w| w.iter().sum());
    let st = rolling(&tr, n, |w| w.iter().sum());
    let mut pdi = vec![NAN; d.len()];
    let mut mdi = vec![NAN; d.len()];
    let mut dx = vec![NAN; d.len()];
    for t in 0..d.len() {
        if st[t].is_nan() {
            continue;
        }
        let (p, m) = if st[t] == 0.0 {
            (0.0, 0.0)
        } else {
            (100.0 * sp[t] / st[t], 100.0 * sm[t] / st[t])
        };
        pdi[t] = p;
        mdi[t] = m;
        dx[t] = if p + m == 0.0 { 0.0 } else { 100.0 * (p - m).abs() / (p + m) };
    }
    (pdi, mdi, dx)
}

fn adx_of(d: &Ohlcv, n: usize) -> Vec<f64> {
    let (_, _, dx) = dmi_lines(d, n);
    let mut out = vec![NAN; d.len()];
    let Some(first) = dx.iter().position(|v| !v.is_nan()) else {
        return out;
    };
    let seed_at = first + n - 1;
    if seed_at >= d.len() {
        return out;
    }
    let mut prev = mean(&dx[first..=seed_at]);
    out[seed_at] = prev;
    for t in seed_at + 1..d.len() {
        prev = (n as f64 * prev + dx[t]) / (n as f64 + 1.0);
        out[t] = prev;
    }
    out
}

fn triple_ema(x: &[f64], n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let e1 = ema(x, n);
    let e2 = ema(&e1, n);
    let e3 = ema(&e2, n);
    (e1, e2, e3)
}

/// Index of the extreme within `w`; ties resolve to the most recent position.
fn latest_extreme(w: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for i in 1..w.len() {
        if !better(w[best], w[i]) {
            best = i;
        }
    }
    best
}

// ---- kernels, one per catalog entry ----

pub(crate) fn k_delta(d: &Ohlcv, p: &Params) -> Lines {
    vec![lagged(&d.close, p.int("n"), |a, b| a - b)]
}

pub(crate) fn k_permutation(d: &Ohlcv, p: &Params) -> Lines {
    let n = p.int("n");
    let out = (0..d.len())
        .map(|t| match window(&d.close, t, n) {
            Some(w) => w.iter().filter(|v| **v < d.close[t]).count() as f64,
            None => NAN,
        })
        .collect();
    vec![out]
}

pub(crate) fn k_log_return(d: &Ohlcv, _: &Params) -> Lines {
    vec![lagged(&d.close, 1, |a, b| (a / b).ln())]
}

pub(crate) fn k_max(d: &Ohlcv, p: &Params) -> Lines {
    vec![rolling_max(&d.close, p.int("n"))]
}

pub(crate) fn k_min(d: &Ohlcv, p: &Params) -> Lines {
    vec![rolling_min(&d.close, p.int("n"))]
}

pub(crate) fn k_middle(d: &Ohlcv, _: &Params) -> Lines {
    vec![middle(d)]
}

pub(crate) fn k_compare(d: &Ohlcv, p: &Params) -> Lines {
    let op: fn(f64, f64) -> bool = match p.word("op") {
        "le" => |a, b| a <= b,
        "ge" => |a, b| a >= b,
        "lt" => |a, b| a < b,
        "gt" => |a, b| a > b,
        "eq" => |a, b| a == b,
        _ => |a, b| a != b,
    };
    vec![lagged(&d.close, p.int("n"), |a, b| if op(a, b) { 1.0 } else { 0.0 })]
}

pub(crate) fn k_count(d: &Ohlcv, p: &Params) -> Lines {
    let n = p.int("n");
    let len = d.len();
    let c = &d.close;
    let out = (0..len)
        .map(|t| {
            if p.word("direction") == "forward" {
                if t + n >= len {
                    NAN
                } else {
                    (t + 1..=t + n).filter(|i| up_day(c, *i)).count() as f64
                }
            } else if t < n {
                NAN
            } else {
                (t + 1 - n..=t).filter(|i| up_day(c, *i)).count() as f64
            }
        })
        .collect();
    vec![out]
}

pub(crate) fn k_cross(d: &Ohlcv, p: &Params) -> Lines {
    let diff = zip(&sma(&d.close, p.int("fast")), &sma(&d.close, p.int("slow")), |a, b| a - b);
    let upward = p.word("direction") == "up";
    let out = lagged(&diff, 1, |now, before| {
        if now.is_nan() || before.is_nan() {
            return NAN;
        }
        let crossed = if upward {
            before <= 0.0 && now > 0.0
        } else {
            before >= 0.0 && now < 0.0
        };
        if crossed {
            1.0
        } else {
            0.0
        }
    });
    vec![out]
}

pub(crate) fn k_sma(d: &Ohlcv, p: &Params) -> Lines {
    vec![sma(&d.close, p.int("n"))]
}

pub(crate) fn k_ema(d: &Ohlcv, p: &Params) -> Lines {
    vec![ema(&d.close, p.int("n"))]
}

pub(crate) fn k_mstd(d: &Ohlcv, p: &Params) -> Lines {
    vec![stdev(&d.close, p.int("n"))]
}

pub(crate) fn k_mvar(d: &Ohlcv, p: &Params) -> Lines {
    vec![rolling(&d.close, p.int("n"), sample_var)]
}

pub(crate) fn k_rsv(d: &Ohlcv, p: &Params) -> Lines {
    vec![rsv_of(d, p.int("n"))]
}

pub(crate) fn k_rsi(d: &Ohlcv, p: &Params) -> Lines {
    vec![rsi_of(&d.close, p.int("n"))]
}

pub(crate) fn k_kdj(d: &Ohlcv, p: &Params) -> Lines {
    let m = p.int("smooth");
    let k = sma(&rsv_of(d, p.int("n")), m);
    let dd = sma(&k, m);
    let j = zip(&k, &dd, |k, d| 3.0 * k - 2.0 * d);
    vec![k, dd, j]
}

pub(crate) fn k_boll(d: &Ohlcv, p: &Params) -> Lines {
    let n = p.int("n");
    let k = p.num("k");
    let mid = sma(&d.close, n);
    let sd = stdev(&d.close, n);
    let upper = zip(&mid, &sd, |m, s| m + k * s);
    let lower = zip(&mid, &sd, |m, s| m - k * s);
    vec![mid, upper, lower]
}

pub(crate) fn k_macd(d: &Ohlcv, p: &Params) -> Lines {
    let macd = zip(&ema(&d.close, p.int("fast")), &ema(&d.close, p.int("slow")), |a, b| a - b);
    let signal = ema(&macd, p.int("signal"));
    let hist = zip(&macd, &signal, |a, b| a - b);
    vec![macd, signal, hist]
}

pub(crate) fn k_cr(d: &Ohlcv, p: &Params) -> Lines {
    let n = p.int("n");
    let mid = middle(d);
    let range: Vec<f64> = (0..d.len()).map(|t| d.high[t] - d.low[t]).collect();
    let out = (0..d.len())
        .map(|t| match (window(&mid, t, n), window(&range, t, n)) {
            (Some(m), Some(r)) => {
                let denom: f64 = r.iter().sum();
                if denom == 0.0 {
                    NAN
                } else {
                    m.iter().sum::<f64>() / denom
                }
            }
            _ => NAN,
        })
        .collect();
    vec![out]
}

pub(crate) fn k_wr(d: &Ohlcv, p: &Params) -> Lines {
    let n = p.int("n");
    let hh = rolling_max(&d.high, n);
    let ll = rolling_min(&d.low, n);
    let out = (0..d.len())
        .map(|t| {
            let range = hh[t] - ll[t];
            if range.is_nan() {
                NAN
            } else if range == 0.0 {
                -50.0
            } else {
                (hh[t] - d.close[t]) / range * -100.0
            }
        })
        .collect();
    vec![out]
}

pub(crate) fn k_cci(d: &Ohlcv, p: &Params) -> Lines {
    let n = p.int("n");
    let tp = middle(d);
    let out = (0..d.len())
        .map(|t| match window(&tp, t, n) {
            Some(w) => {
                let m = mean(w);
                let md = w.iter().map(|v| (v - m).abs()).sum::<f64>() / n as f64;
                if md == 0.0 {
                    0.0
                } else {
                    (tp[t] - m) / (md / 0.015)
                }
            }
            None => NAN,
        })
        .collect();
    vec![out]
}

pub(crate) fn k_tr(d: &Ohlcv, _: &Params) -> Lines {
    vec![true_range(d)]
}

pub(crate) fn k_atr(d: &Ohlcv, p: &Params) -> Lines {
    vec![sma(&true_range(d), p.int("n"))]
}

pub(crate) fn k_dma(d: &Ohlcv, p: &Params) -> Lines {
    vec![zip(&sma(&d.close, p.int("fast")), &sma(&d.close, p.int("slow")), |a, b| a - b)]
}

pub(crate) fn k_dmi(d: &Ohlcv, p: &Params) -> Lines {
    let (pdi, mdi, dx) = dmi_lines(d, p.int("n"));
    vec![pdi, mdi, dx]
}

fn single_bar_di(d: &Ohlcv, n: usize, positive: bool) -> Vec<f64> {
    let tr = true_range(d);
    (0..d.len())
        .map(|t| {
            if t < n {
                return NAN;
            }
            let ll = min_of(&d.low[t - n..t]);
            if tr[t] == 0.0 {
                return 0.0;
            }
            if positive {
                (d.high[t] - ll) / tr[t]
            } else {
                (ll - d.low[t]) / tr[t]
            }
        })
        .collect()
}

pub(crate) fn k_pdi(d: &Ohlcv, p: &Params) -> Lines {
    vec![single_bar_di(d, p.int("n"), true)]
}

pub(crate) fn k_mdi(d: &Ohlcv, p: &Params) -> Lines {
    vec![single_bar_di(d, p.int("n"), false)]
}

pub(crate) fn k_adx(d: &Ohlcv, p: &Params) -> Lines {
    vec![adx_of(d, p.int("n"))]
}

pub(crate) fn k_adxr(d: &Ohlcv, p: &Params) -> Lines {
    let adx = adx_of(d, p.int("n"));
    let mut out = vec![NAN; d.len()];
    if let Some(first) = adx.iter().position(|v| !v.is_nan()) {
        let mut prev = adx[first];
        out[first] = prev;
        for t in first + 1..d.len() {
            prev = (adx[t] + prev) / 2.0;
            out[t] = prev;
        }
    }
    vec![out]
}

pub(crate) fn k_trix(d: &Ohlcv, p: &Params) -> Lines {
    let (_, _, e3) = triple_ema(&d.close, p.int("n"));
    vec![lagged(&e3, 1, |a, b| (a - b) / b * 100.0)]
}

pub(crate) fn k_tema(d: &Ohlcv, p: &Params) -> Lines {
    let (e1, e2, e3) = triple_ema(&d.close, p.int("n"));
    let out = (0..d.len()).map(|t| 3.0 * e1[t] - 3.0 * e2[t] + e3[t]).collect();
    vec![out]
}

pub(crate) fn k_vr(d: &Ohlcv, p: &Params) -> Lines {
    vec![volume_balance(d, p.int("n"))]
}

pub(crate) fn k_mfi(d: &Ohlcv, p: &Params) -> Lines {
    let flow: Vec<f64> = middle(d).iter().zip(&d.volume).map(|(m, v)| m * v).collect();
    let avg = sma(&flow, p.int("n"));
    let out = zip(&flow, &avg, |f, a| {
        if a.is_nan() {
            NAN
        } else if a == 0.0 {
            100.0
        } else {
            f / a * 100.0
        }
    });
    vec![out]
}

pub(crate) fn k_vwma(d: &Ohlcv, p: &Params) -> Lines {
    let n = p.int("n");
    let out = (0..d.len())
        .map(|t| {
            if t + 1 < n {
                return NAN;
            }
            let r = t + 1 - n..=t;
            let vol: f64 = d.volume[r.clone()].iter().sum();
            if vol == 0.0 {
                mean(&d.close[r])
            } else {
                r.map(|i| d.close[i] * d.volume[i]).sum::<f64>() / vol
            }
        })
        .collect();
    vec![out]
}

pub(crate) fn k_chop(d: &Ohlcv, p: &Params) -> Lines {
    let n = p.int("n");
    let tr = true_range(d);
    let out = (0..d.len())
        .map(|t| match window(&tr, t, n) {
            Some(w) => {
                let range = max_of(&d.high[t + 1 - n..=t]) - min_of(&d.low[t + 1 - n..=t]);
                if range == 0.0 {
                    100.0
                } else {
                    100.0 * (w.iter().sum::<f64>() / range).log10() / (n as f64).log10()
                }
            }
            None => NAN,
        })
        .collect();
    vec![out]
}

pub(crate) fn k_ker(d: &Ohlcv, p: &Params) -> Lines {
    let n = p.int("n");
    let hh = rolling_max(&d.high, n);
    let ll = rolling_min(&d.low, n);
    vec![zip(&hh, &ll, |h, l| (h - l) / h)]
}

pub(crate) fn k_kama(d: &Ohlcv, p: &Params) -> Lines {
    let n = p.int("n");
    let fast = 2.0 / (p.int("fast") as f64 + 1.0);
    let slow = 2.0 / (p.int("slow") as f64 + 1.0);
    let c = &d.close;
    let mut out = vec![NAN; d.len()];
    if n > d.len() {
        return vec![out];
    }
    let mut prev = c[n - 1];
    out[n - 1] = prev;
    for t in n..d.len() {
        let change = (c[t] - c[t - n]).abs();
        let noise: f64 = (t + 1 - n..=t).map(|i| (c[i] - c[i - 1]).abs()).sum();
        let er = if noise == 0.0 { 0.0 } else { change / noise };
        let sc = (er * (fast - slow) + slow).powi(2);
        prev += sc * (c[t] - prev);
        out[t] = prev;
    }
    vec![out]
}

pub(crate) fn k_ppo(d: &Ohlcv, p: &Params) -> Lines {
    let f = ema(&d.close, p.int("fast"));
    let s = ema(&d.close, p.int("slow"));
    vec![zip(&f, &s, |a, b| (a - b) / b * 100.0)]
}

pub(crate) fn k_stochrsi(d: &Ohlcv, p: &Params) -> Lines {
    let rsi = rsi_of(&d.close, p.int("n"));
    let k = rolling(&rsi, p.int("m"), |w| {
        let (lo, hi) = (min_of(w), max_of(w));
        if hi == lo {
            50.0
        } else {
            (w[w.len() - 1] - lo) / (hi - lo) * 100.0
        }
    });
    let dd = sma(&k, p.int("d"));
    vec![k, dd]
}

pub(crate) fn k_wt(d: &Ohlcv, p: &Params) -> Lines {
    let n1 = p.int("channel");
    let ap = middle(d);
    let esa = ema(&ap, n1);
    let dev = zip(&ap, &esa, |a, e| (a - e).abs());
    let dd = ema(&dev, n1);
    let ci: Vec<f64> = (0..d.len())
        .map(|t| {
            if dd[t].is_nan() {
                NAN
            } else if dd[t] == 0.0 {
                0.0
            } else {
                (ap[t] - esa[t]) / (0.015 * dd[t])
            }
        })
        .collect();
    let wt1 = ema(&ci, p.int("average"));
    let wt2 = sma(&wt1, p.int("signal"));
    vec![wt1, wt2]
}

pub(crate) fn k_supertrend(d: &Ohlcv, p: &Params) -> Lines {
    let mult = p.num("mult");
    let atr = sma(&true_range(d), p.int("n"));
    let len = d.len();
    let (mut st, mut upper, mut lower) = (vec![NAN; len], vec![NAN; len], vec![NAN; len]);
    let Some(start) = atr.iter().position(|v| !v.is_nan()) else {
        return vec![st, upper, lower];
    };
    let c = &d.close;
    let mut uptrend = false;
    for t in start..len {
        let bu = c[t - 1] + mult * atr[t];
        let bl = c[t - 1] - mult * atr[t];
        if t == start {
            upper[t] = bu;
            lower[t] = bl;
            uptrend = c[t] > bu;
        } else {
            upper[t] = if bu < upper[t - 1] || c[t - 1] > upper[t - 1] { bu } else { upper[t - 1] };
            lower[t] = if bl > lower[t - 1] || c[t - 1] < lower[t - 1] { bl } else { lower[t - 1] };
            uptrend = if uptrend { c[t] >= lower[t] } else { c[t] > upper[t] };
        }
        st[t] = if uptrend { lower[t] } else { upper[t] };
    }
    vec![st, upper, lower]
}

pub(crate) fn k_aroon(d: &Ohlcv, p: &Params) -> Lines {
    let n = p.int("n");
    let len = d.len();
    let (mut up, mut down, mut osc) = (vec![NAN; len], vec![NAN; len], vec![NAN; len]);
    for t in n..len {
        let hi = latest_extreme(&d.high[t - n..=t], |best, x| best > x);
        let lo = latest_extreme(&d.low[t - n..=t], |best, x| best < x);
        up[t] = 100.0 * hi as f64 / n as f64;
        down[t] = 100.0 * lo as f64 / n as f64;
        osc[t] = up[t] - down[t];
    }
    vec![up, down, osc]
}

pub(crate) fn k_zscore(d: &Ohlcv, p: &Params) -> Lines {
    let n = p.int("n");
    let out = (0..d.len())
        .map(|t| match window(&d.close, t, n) {
            Some(w) => {
                let sd = sample_var(w).sqrt();
                if sd == 0.0 {
                    0.0
                } else {
                    (d.close[t] - mean(w)) / sd
                }
            }
            None => NAN,
        })
        .collect();
    vec![out]
}

pub(crate) fn k_ao(d: &Ohlcv, p: &Params) -> Lines {
    let median: Vec<f64> = (0..d.len()).map(|t| (d.high[t] + d.low[t]) / 2.0).collect();
    vec![zip(&sma(&median, p.int("fast")), &sma(&median, p.int("slow")), |a, b| a - b)]
}

pub(crate) fn k_bop(d: &Ohlcv, _: &Params) -> Lines {
    let out = (0..d.len())
        .map(|t| {
            let range = d.high[t] - d.low[t];
            if range == 0.0 {
                0.0
            } else {
                (d.close[t] - d.open[t]) / range * d.volume[t]
            }
        })
        .collect();
    vec![out]
}

pub(crate) fn k_mad(d: &Ohlcv, p: &Params) -> Lines {
    vec![rolling(&d.close, p.int("n"), |w| {
        let m = mean(w);
        w.iter().map(|v| (v - m).abs()).sum::<f64>() / w.len() as f64
    })]
}

pub(crate) fn k_roc(d: &Ohlcv, p: &Params) -> Lines {
    vec![roc_of(&d.close, p.int("n"))]
}

pub(crate) fn k_coppock(d: &Ohlcv, p: &Params) -> Lines {
    let long = roc_of(&d.close, p.int("long"));
    let short = roc_of(&d.close, p.int("short"));
    vec![zip(&long, &short, |a, b| (a + 0.15 * b) / 1.15)]
}

pub(crate) fn k_ichimoku(d: &Ohlcv, p: &Params) -> Lines {
    let mid = |n: usize| zip(&rolling_max(&d.high, n), &rolling_min(&d.low, n), |h, l| (h + l) / 2.0);
    let conversion = mid(p.int("conversion"));
    let base = mid(p.int("base"));
    let span_a = zip(&conversion, &base, |a, b| (a + b) / 2.0);
    let span_b = mid(p.int("span"));
    vec![conversion, base, span_a, span_b]
}

pub(crate) fn k_cti(d: &Ohlcv, p: &Params) -> Lines {
    let f = sma(&d.close, p.int("fast"));
    let s = sma(&d.close, p.int("slow"));
    vec![zip(&f, &s, |a, b| (a - b) / (a + b))]
}

pub(crate) fn k_lrma(d: &Ohlcv, p: &Params) -> Lines {
    let n = p.int("n");
    vec![rolling(&d.close, n, |w| {
        let xm = (n as f64 - 1.0) / 2.0;
        let ym = mean(w);
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (i, y) in w.iter().enumerate() {
            let dx = i as f64 - xm;
            sxy += dx * (y - ym);
            sxx += dx * dx;
        }
        ym + sxy / sxx * (n as f64 - 1.0 - xm)
    })]
}

pub(crate) fn k_eri(d: &Ohlcv, _: &Params) -> Lines {
    let bull = (0..d.len()).map(|t| (d.high[t] + d.low[t] + d.close[t]) / 3.0).collect();
    let bear = (0..d.len()).map(|t| (d.high[t] + d.low[t] - d.close[t]) / 3.0).collect();
    vec![bull, bear]
}

pub(crate) fn k_ftr(d: &Ohlcv, _: &Params) -> Lines {
    vec![(0..d.len()).map(|t| ((d.high[t] + d.low[t]) / 2.0).ln()).collect()]
}

pub(crate) fn k_rvgi(d: &Ohlcv, p: &Params) -> Lines {
    let f = sma(&d.close, p.int("fast"));
    let s = sma(&d.close, p.int("slow"));
    vec![zip(&f, &s, |a, b| (a - b) / b * 100.0)]
}

pub(crate) fn k_inertia(d: &Ohlcv, _: &Params) -> Lines {
    vec![roc_of(&d.close, 1)]
}

pub(crate) fn k_kst(d: &Ohlcv, p: &Params) -> Lines {
    let parts: Vec<Vec<f64>> = (1..=4)
        .map(|i| {
            let roc = roc_of(&d.close, p.int(&format!("roc{i}")));
            sma(&roc, p.int(&format!("sma{i}")))
        })
        .collect();
    let out = (0..d.len()).map(|t| parts.iter().map(|s| s[t]).sum()).collect();
    vec![out]
}

pub(crate) fn k_pgo(d: &Ohlcv, p: &Params) -> Lines {
    vec![zip(&d.close, &sma(&d.close, p.int("n")), |c, m| c - m)]
}

pub(crate) fn k_psl(d: &Ohlcv, p: &Params) -> Lines {
    let n = p.int("n");
    let out = (0..d.len())
        .map(|t| {
            if t < n {
                NAN
            } else {
                (t + 1 - n..=t).filter(|i| up_day(&d.close, *i)).count() as f64 / n as f64 * 100.0
            }
        })
        .collect();
    vec![out]
}

pub(crate) fn k_pvo(d: &Ohlcv, p: &Params) -> Lines {
    vec![volume_balance(d, p.int("n"))]
}

pub(crate) fn k_qqe(d: &Ohlcv, p: &Params) -> Lines {
    let n = p.int("n");
    let wilders = 2 * n - 1;
    let factor = p.num("factor");
    let rsi_ma = ema(&rsi_of(&d.close, n), p.int("smooth"));
    let atr_rsi = lagged(&rsi_ma, 1, |a, b| (a - b).abs());
    let dar: Vec<f64> = ema(&ema(&atr_rsi, wilders), wilders).iter().map(|v| v * factor).collect();
    let len = d.len();
    let mut trail = vec![NAN; len];
    let Some(start) = dar.iter().position(|v| !v.is_nan()) else {
        return vec![rsi_ma, trail];
    };
    let mut long_band = rsi_ma[start] - dar[start];
    let mut short_band = rsi_ma[start] + dar[start];
    let mut trend = 1;
    trail[start] = long_band;
    for t in start + 1..len {
        let (r, r_prev) = (rsi_ma[t], rsi_ma[t - 1]);
        let new_long = r - dar[t];
        let new_short = r + dar[t];
        let next_long = if r_prev > long_band && r > long_band {
            long_band.max(new_long)
        } else {
            new_long
        };
        let next_short = if r_prev < short_band && r < short_band {
            short_band.min(new_short)
        } else {
            new_short
        };
        if r > short_band {
            trend = 1;
        } else if r < long_band {
            trend = -1;
        }
        long_band = next_long;
        short_band = next_short;
        trail[t] = if trend == 1 { long_band } else { short_band };
    }
    vec![rsi_ma, trail]
}
