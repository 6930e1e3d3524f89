//! The indicator registry. Each entry documents its definition, parameters, output lines
//! and any place where it departs from a common textbook variant.

use serde::Serialize;

use super::kernels::*;
use super::spec::{IndicatorSpec, ParamValue, Params};
use super::{IndicatorError, Ohlcv};

/// Input columns an indicator reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Channel {
    Open,
    High,
    Low,
    Close,
    Volume,
}

/// Units of an indicator's primary line; used to make values comparable across assets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scale {
    /// Dimensionless (oscillators, ratios, counts, flags).
    Unitless,
    /// A price level such as a moving average.
    Level,
    /// A price difference (spread, deviation, range).
    Spread,
    /// Price squared.
    Squared,
    /// A ratio multiplied by share volume.
    VolumeWeighted,
    /// Natural log of a price level.
    LogLevel,
}

impl Scale {
    /// Cross-sectionally comparable version of `value` given the same bar's close and volume.
    pub fn normalize(self, value: f64, close: f64, volume: f64) -> f64 {
        match self {
            Scale::Unitless => value,
            Scale::Level => close / value - 1.0,
            Scale::Spread => value / close,
            Scale::Squared => value / (close * close),
            Scale::VolumeWeighted => {
                if volume == 0.0 {
                    0.0
                } else {
                    value / volume
                }
            }
            Scale::LogLevel => value - close.ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ParamDomain {
    Int { default: usize, min: usize, max: usize },
    Real { default: f64, min: f64, max: f64 },
    Word { default: &'static str, choices: &'static [&'static str] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub domain: ParamDomain,
}

impl ParamSpec {
    pub fn default(&self) -> ParamValue {
        match self.domain {
            ParamDomain::Int { default, .. } => ParamValue::Num(default as f64),
            ParamDomain::Real { default, .. } => ParamValue::Num(default),
            ParamDomain::Word { default, .. } => ParamValue::Word(default.to_string()),
        }
    }
}

type Kernel = fn(&Ohlcv, &Params) -> Lines;
type Check = fn(&Params) -> Result<(), (&'static str, String)>;

#[derive(Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub aliases: &'static [&'static str],
    pub doc: &'static str,
    pub params: &'static [ParamSpec],
    pub inputs: &'static [Channel],
    pub lines: &'static [&'static str],
    pub scale: Scale,
    /// Output depends on the whole history through a recursion seed, so shifting the
    /// start of the input changes early values until the seed washes out.
    pub recursive: bool,
    /// Some parameterization reads bars after the evaluation index; see [`reads_future`].
    pub forward_looking: bool,
    #[serde(skip)]
    pub(crate) kernel: Kernel,
    #[serde(skip)]
    pub(crate) check: Option<Check>,
}

impl std::fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("name", &self.name)
            .field("lines", &self.lines)
            .finish_non_exhaustive()
    }
}

impl CatalogEntry {
    /// Spec with every parameter at its default.
    pub fn template(&self) -> IndicatorSpec {
        self.params
            .iter()
            .fold(IndicatorSpec::new(self.name), |s, p| s.with(p.name, p.default()))
    }
}

const fn int(name: &'static str, default: usize, min: usize) -> ParamSpec {
    ParamSpec {
        name,
        domain: ParamDomain::Int { default, min, max: 1000 },
    }
}

const fn real(name: &'static str, default: f64, min: f64, max: f64) -> ParamSpec {
    ParamSpec {
        name,
        domain: ParamDomain::Real { default, min, max },
    }
}

const fn word(name: &'static str, default: &'static str, choices: &'static [&'static str]) -> ParamSpec {
    ParamSpec {
        name,
        domain: ParamDomain::Word { default, choices },
    }
}

fn fast_below_slow(p: &Params) -> Result<(), (&'static str, String)> {
    if p.int("fast") < p.int("slow") {
        Ok(())
    } else {
        Err(("fast", format!("must be below slow ({})", p.int("slow"))))
    }
}

use Channel::{Close as C, High as H, Low as L, Open as O, Volume as V};

const CLOSE: &[Channel] = &[C];
const HLC: &[Channel] = &[H, L, C];
const HL: &[Channel] = &[H, L];
const HLCV: &[Channel] = &[H, L, C, V];
const CV: &[Channel] = &[C, V];
const ONE: &[&str] = &["value"];

const N1: &[ParamSpec] = &[int("n", 1, 1)];

macro_rules! entry {
    ($name:literal, $aliases:expr, $doc:literal, $params:expr, $inputs:expr, $lines:expr, $scale:ident, $kernel:ident) => {
        entry!($name, $aliases, $doc, $params, $inputs, $lines, $scale, $kernel, false, None)
    };
    ($name:literal, $aliases:expr, $doc:literal, $params:expr, $inputs:expr, $lines:expr, $scale:ident, $kernel:ident, $rec:expr) => {
        entry!($name, $aliases, $doc, $params, $inputs, $lines, $scale, $kernel, $rec, None)
    };
    ($name:literal, $aliases:expr, $doc:literal, $params:expr, $inputs:expr, $lines:expr, $scale:ident, $kernel:ident, $rec:expr, $check:expr) => {
        CatalogEntry {
            name: $name,
            aliases: $aliases,
            doc: $doc,
            params: $params,
            inputs: $inputs,
            lines: $lines,
            scale: Scale::$scale,
            recursive: $rec,
            forward_looking: false,
            kernel: $kernel,
            check: $check,
        }
    };
}

static CATALOG: [CatalogEntry; 60] = [
    entry!("DELTA", &[], "Close minus the close `n` bars earlier. No standard definition exists; this is the engine's interpretation.",
        N1, CLOSE, ONE, Spread, k_delta),
    entry!("PERMUTATION", &["PERM"], "Zero-based rank of the latest close within the trailing `n` closes (count of strictly smaller values). Interpretation; no standard definition exists.",
        &[int("n", 5, 1)], CLOSE, ONE, Unitless, k_permutation),
    entry!("LOG_RETURN", &["LOGRET", "LOG-RETURN"], "Natural log of close over previous close.",
        &[], CLOSE, ONE, Unitless, k_log_return),
    entry!("MAX", &["MAX_IN_RANGE"], "Highest close over the trailing `n` bars.",
        &[int("n", 20, 1)], CLOSE, ONE, Level, k_max),
    entry!("MIN", &["MIN_IN_RANGE"], "Lowest close over the trailing `n` bars.",
        &[int("n", 20, 1)], CLOSE, ONE, Level, k_min),
    entry!("MIDDLE", &["TP", "TYPICAL"], "(close + high + low) / 3.",
        &[], HLC, ONE, Level, k_middle),
    entry!("COMPARE", &["CMP"], "1 when `close[t] op close[t-n]` holds, else 0; `op` is one of le, ge, lt, gt, eq, ne. Comparing against a lagged close keeps the flag exact.",
        &[word("op", "gt", &["le", "ge", "lt", "gt", "eq", "ne"]), int("n", 1, 1)], CLOSE, ONE, Unitless, k_compare),
    CatalogEntry {
        name: "COUNT",
        aliases: &[],
        doc: "Number of up closes among the `n` bars ending at t (backward) or starting after t (forward). The forward count reads future bars: its last `n` values are undefined and it is excluded from trading signals.",
        params: &[word("direction", "backward", &["backward", "forward"]), int("n", 5, 1)],
        inputs: CLOSE,
        lines: ONE,
        scale: Scale::Unitless,
        recursive: false,
        forward_looking: true,
        kernel: k_count,
        check: None,
    },
    entry!("CROSS", &[], "1 on the bar where SMA(fast) crosses SMA(slow) in the given direction (up: from <= 0 to > 0 in their difference; down: the mirror), else 0.",
        &[int("fast", 5, 1), int("slow", 20, 2), word("direction", "up", &["up", "down"])], CLOSE, ONE, Unitless, k_cross, false, Some(fast_below_slow)),
    entry!("SMA", &["MA"], "Arithmetic mean of the trailing `n` closes.",
        &[int("n", 20, 1)], CLOSE, ONE, Level, k_sma),
    entry!("EMA", &[], "Exponential average with smoothing 1/(n+1), seeded by the SMA of the first `n` values. Many libraries use 2/(n+1); this catalog keeps the 1/(n+1) form and uses it everywhere an EMA appears.",
        &[int("n", 20, 1)], CLOSE, ONE, Level, k_ema, true),
    entry!("MSTD", &["STD"], "Sample standard deviation (divisor n-1) of the trailing `n` closes.",
        &[int("n", 20, 2)], CLOSE, ONE, Spread, k_mstd),
    entry!("MVAR", &["VAR"], "Sample variance (divisor n-1) of the trailing `n` closes.",
        &[int("n", 20, 2)], CLOSE, ONE, Squared, k_mvar),
    entry!("RSV", &[], "(close - lowest low) / (highest high - lowest low) * 100 over `n` bars; 50 when the range is zero.",
        &[int("n", 9, 1)], HLC, ONE, Unitless, k_rsv),
    entry!("RSI", &[], "100 - 100/(1 + G/L) with G, L the simple averages of gains and losses over the last `n` changes. L = 0 gives 100, G = 0 gives 0, both zero give 50.",
        &[int("n", 14, 1)], CLOSE, ONE, Unitless, k_rsi),
    entry!("KDJ", &[], "K = SMA(RSV(n), smooth), D = SMA(K, smooth), J = 3K - 2D.",
        &[int("n", 9, 1), int("smooth", 3, 1)], HLC, &["k", "d", "j"], Unitless, k_kdj),
    entry!("BOLL", &["BOLLINGER", "BB"], "Middle SMA(n) with bands at plus and minus k sample standard deviations.",
        &[int("n", 20, 2), real("k", 2.0, 0.0, 100.0)], CLOSE, &["mid", "upper", "lower"], Level, k_boll),
    entry!("MACD", &[], "EMA(fast) - EMA(slow); signal is EMA(signal) of that line; hist is their difference.",
        &[int("fast", 12, 1), int("slow", 26, 2), int("signal", 9, 1)], CLOSE, &["macd", "signal", "hist"], Spread, k_macd, true, Some(fast_below_slow)),
    entry!("CR", &[], "Sum of typical prices over sum of high-low ranges across `n` bars; undefined when every range is zero.",
        &[int("n", 26, 1)], HLC, ONE, Unitless, k_cr),
    entry!("WR", &["WILLR"], "(highest high - close) / (highest high - lowest low) * -100 over `n` bars; -50 when the range is zero.",
        &[int("n", 14, 1)], HLC, ONE, Unitless, k_wr),
    entry!("CCI", &[], "(typical - SMA(typical)) / (mean deviation / 0.015) over `n` bars; 0 when the mean deviation is zero.",
        &[int("n", 20, 1)], HLC, ONE, Unitless, k_cci),
    entry!("TR", &[], "max(high - low, |high - prev close|, |low - prev close|).",
        &[], HLC, ONE, Spread, k_tr),
    entry!("ATR", &[], "SMA of the true range over `n` bars.",
        &[int("n", 14, 1)], HLC, ONE, Spread, k_atr),
    entry!("DMA", &[], "SMA(fast) - SMA(slow) of the close.",
        &[int("fast", 10, 1), int("slow", 50, 2)], CLOSE, ONE, Spread, k_dma, false, Some(fast_below_slow)),
    entry!("DMI", &[], "Directional movement system: pdi = 100 * sum(+DM)/sum(TR), mdi likewise, dx = 100 * |pdi - mdi| / (pdi + mdi), sums over `n` bars (simple rather than Wilder smoothing).",
        &[int("n", 14, 1)], &[H, L, C], &["pdi", "mdi", "dx"], Unitless, k_dmi),
    entry!("PDI", &["+DI", "PLUS_DI"], "Single-bar positive directional ratio: (high - lowest low of the previous `n` bars) / true range; 0 when the true range is zero.",
        &[int("n", 14, 1)], HLC, ONE, Unitless, k_pdi),
    entry!("MDI", &["-DI", "MINUS_DI"], "Single-bar negative directional ratio: (lowest low of the previous `n` bars - low) / true range; 0 when the true range is zero.",
        &[int("n", 14, 1)], HLC, ONE, Unitless, k_mdi),
    entry!("ADX", &[], "Seeded with the mean of the first `n` DMI dx values, then ADX = (n * previous ADX + dx) / (n + 1).",
        &[int("n", 14, 1)], HLC, ONE, Unitless, k_adx, true),
    entry!("ADXR", &[], "(ADX + previous ADXR) / 2, seeded with the first ADX value.",
        &[int("n", 14, 1)], HLC, ONE, Unitless, k_adxr, true),
    entry!("TRIX", &[], "Percent change of the triple-smoothed EMA. The recursive rendering that divides by a previous TRIX value is not well defined, so the common percent-change form is used.",
        &[int("n", 15, 1)], CLOSE, ONE, Unitless, k_trix, true),
    entry!("TEMA", &[], "3 * EMA - 3 * EMA(EMA) + EMA(EMA(EMA)).",
        &[int("n", 20, 1)], CLOSE, ONE, Level, k_tema, true),
    entry!("VR", &[], "(up volume - down volume) / (up volume + down volume) * 100 over `n` bars; unchanged closes count in neither; 0 when both are zero.",
        &[int("n", 26, 1)], CV, ONE, Unitless, k_vr),
    entry!("MFI", &[], "Money flow (typical price * volume) as a percentage of its `n`-bar average; 100 when the average is zero. Differs from the bounded 0-100 oscillator found in many libraries.",
        &[int("n", 14, 1)], HLCV, ONE, Unitless, k_mfi),
    entry!("VWMA", &[], "Volume-weighted mean close over `n` bars; falls back to the plain mean when the window has no volume.",
        &[int("n", 20, 1)], CV, ONE, Level, k_vwma),
    entry!("CHOP", &[], "100 * log10(sum of true range / (highest high - lowest low)) / log10(n) over `n` bars; 100 when the range is zero.",
        &[int("n", 14, 2)], HLC, ONE, Unitless, k_chop),
    entry!("KER", &[], "(highest high - lowest low) / highest high over `n` bars. This follows the catalog's range form, not Kaufman's direction-over-volatility ratio (which KAMA uses).",
        &[int("n", 10, 1)], HL, ONE, Unitless, k_ker),
    entry!("KAMA", &[], "Kaufman adaptive average: efficiency ratio over `n` bars maps to a squared smoothing constant between 2/(fast+1) and 2/(slow+1). Seeded with the close at index n-1.",
        &[int("n", 10, 1), int("fast", 2, 1), int("slow", 30, 2)], CLOSE, ONE, Level, k_kama, true, Some(fast_below_slow)),
    entry!("PPO", &[], "(EMA(fast) - EMA(slow)) / EMA(slow) * 100.",
        &[int("fast", 12, 1), int("slow", 26, 2)], CLOSE, ONE, Unitless, k_ppo, true, Some(fast_below_slow)),
    entry!("STOCHRSI", &["STOCH_RSI"], "k = stochastic of RSI(n) over `m` RSI values * 100 (50 when flat); d = SMA(k, d).",
        &[int("n", 14, 1), int("m", 14, 1), int("d", 3, 1)], CLOSE, &["k", "d"], Unitless, k_stochrsi),
    entry!("WT", &["WAVETREND"], "Wave trend: esa = EMA(typical, channel), dev = EMA(|typical - esa|, channel), ci = (typical - esa)/(0.015 * dev), wt1 = EMA(ci, average), wt2 = SMA(wt1, signal). Uses this catalog's EMA.",
        &[int("channel", 10, 1), int("average", 21, 1), int("signal", 4, 1)], HLC, &["wt1", "wt2"], Unitless, k_wt, true),
    entry!("SUPERTREND", &[], "Bands at previous close plus and minus mult * ATR(n), ratcheted in the trend's favour; the line follows the lower band in an uptrend and the upper band otherwise, flipping when the close crosses the active band.",
        &[int("n", 10, 1), real("mult", 3.0, 0.0, 100.0)], HLC, &["supertrend", "upper", "lower"], Level, k_supertrend, true),
    entry!("AROON", &[], "up = 100 * (n - bars since the highest high) / n over the last n+1 bars, down likewise for the lowest low, osc = up - down. Ties resolve to the most recent bar.",
        &[int("n", 25, 1)], HL, &["up", "down", "osc"], Unitless, k_aroon),
    entry!("ZSCORE", &["Z", "Z_SCORE"], "(close - SMA(n)) / sample std(n); 0 when the window is flat.",
        &[int("n", 20, 2)], CLOSE, ONE, Unitless, k_zscore),
    entry!("AO", &[], "SMA(fast) - SMA(slow) of the median price (high + low) / 2.",
        &[int("fast", 5, 1), int("slow", 34, 2)], HL, ONE, Spread, k_ao, false, Some(fast_below_slow)),
    entry!("BOP", &[], "(close - open) / (high - low) * volume; 0 when high equals low. The volume factor is kept as defined in the catalog.",
        &[], &[O, H, L, C, V], ONE, VolumeWeighted, k_bop),
    entry!("MAD", &[], "Mean absolute deviation of the trailing `n` closes about their mean.",
        &[int("n", 20, 1)], CLOSE, ONE, Spread, k_mad),
    entry!("ROC", &[], "(close - close n bars ago) / close n bars ago * 100.",
        &[int("n", 12, 1)], CLOSE, ONE, Unitless, k_roc),
    entry!("COPPOCK", &[], "(ROC(long) + 0.15 * ROC(short)) / 1.15, exactly as the catalog renders it. The usual Coppock curve instead applies a weighted moving average to ROC(14) + ROC(11).",
        &[int("long", 14, 1), int("short", 11, 1)], CLOSE, ONE, Unitless, k_coppock),
    entry!("ICHIMOKU", &[], "Standard midpoint lines: conversion = (HH + LL)/2 over `conversion` bars, base likewise over `base`, span_a = (conversion + base)/2, span_b = midpoint over `span`. Values are reported unshifted at the bar they are computed from; the lagging span is omitted because it plots the current close in the past.",
        &[int("conversion", 9, 1), int("base", 26, 1), int("span", 52, 1)], HL, &["conversion", "base", "span_a", "span_b"], Level, k_ichimoku),
    entry!("CTI", &[], "(SMA(fast) - SMA(slow)) / (SMA(fast) + SMA(slow)). The catalog's moving-average form, not the correlation-with-time version.",
        &[int("fast", 10, 1), int("slow", 20, 2)], CLOSE, ONE, Unitless, k_cti, false, Some(fast_below_slow)),
    entry!("LRMA", &["LINREG"], "Endpoint of the least-squares line fitted to the trailing `n` closes.",
        &[int("n", 14, 2)], CLOSE, ONE, Level, k_lrma),
    entry!("ERI", &["ELDER"], "bull = (high + low + close)/3, bear = (high + low - close)/3, as the catalog defines them. The usual Elder-ray uses high and low minus an EMA.",
        &[], HLC, &["bull", "bear"], Level, k_eri),
    entry!("FTR", &["FISHER"], "Natural log of the median price (high + low)/2, as the catalog defines it.",
        &[], HL, ONE, LogLevel, k_ftr),
    entry!("RVGI", &["RVI"], "(SMA(fast) - SMA(slow)) / SMA(slow) * 100. The catalog's moving-average form.",
        &[int("fast", 10, 1), int("slow", 20, 2)], CLOSE, ONE, Unitless, k_rvgi, false, Some(fast_below_slow)),
    entry!("INERTIA", &[], "One-bar percent change of the close.",
        &[], CLOSE, ONE, Unitless, k_inertia),
    entry!("KST", &[], "Unit-weighted sum of four smoothed rates of change: SMA(ROC(roc_i), sma_i) for i = 1..4. Common variants weight the components 1, 2, 3, 4.",
        &[int("roc1", 10, 1), int("roc2", 15, 1), int("roc3", 20, 1), int("roc4", 30, 1),
          int("sma1", 10, 1), int("sma2", 10, 1), int("sma3", 10, 1), int("sma4", 15, 1)], CLOSE, ONE, Unitless, k_kst),
    entry!("PGO", &[], "close - SMA(n). The catalog's form; the common version divides by an ATR.",
        &[int("n", 14, 1)], CLOSE, ONE, Spread, k_pgo),
    entry!("PSL", &[], "Percentage of up closes among the last `n` bars.",
        &[int("n", 12, 1)], CLOSE, ONE, Unitless, k_psl),
    entry!("PVO", &[], "(up volume - down volume) / (up volume + down volume) * 100 over `n` bars, as the catalog defines it; same form as VR with a shorter default window.",
        &[int("n", 14, 1)], CV, ONE, Unitless, k_pvo),
    entry!("QQE", &[], "rsi_ma = EMA(RSI(n), smooth); band width = factor * EMA(EMA(|change of rsi_ma|, 2n-1), 2n-1); trail follows the ratcheting long band in an uptrend and the short band otherwise. Uses this catalog's EMA.",
        &[int("n", 14, 1), int("smooth", 5, 1), real("factor", 4.236, 0.0, 100.0)], CLOSE, &["rsi_ma", "trail"], Unitless, k_qqe, true),
];

/// The full indicator catalog in a fixed order.
pub fn list_catalog() -> &'static [CatalogEntry] {
    &CATALOG
}

/// Case-insensitive lookup by canonical name or alias.
pub fn lookup(name: &str) -> Result<&'static CatalogEntry, IndicatorError> {
    let key = name.trim().to_ascii_uppercase();
    CATALOG
        .iter()
        .find(|e| e.name == key || e.aliases.contains(&key.as_str()))
        .ok_or_else(|| IndicatorError::Unknown(name.to_string()))
}

/// True when this spec reads bars after the evaluation index and so must never drive a
/// trading decision.
pub fn reads_future(spec: &IndicatorSpec) -> bool {
    spec.params()
        .get("direction")
        .is_some_and(|v| *v == ParamValue::Word("forward".into()))
        && lookup(spec.name()).is_ok_and(|e| e.name == "COUNT")
}
