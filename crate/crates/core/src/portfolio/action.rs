use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{PortfolioError, Result};

/// The ten action categories an agent may emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    BuySellHold,
    AdjustQuantityPrice,
    SetStops,
    AdjustRiskExposure,
    ExecuteAllocation,
    EnforceCompliance,
    Rebalance,
    MarketScan,
    InitiateHedge,
    GenerateReport,
}

impl ActionKind {
    pub const ALL: [ActionKind; 10] = [
        ActionKind::BuySellHold,
        ActionKind::AdjustQuantityPrice,
        ActionKind::SetStops,
        ActionKind::AdjustRiskExposure,
        ActionKind::ExecuteAllocation,
        ActionKind::EnforceCompliance,
        ActionKind::Rebalance,
        ActionKind::MarketScan,
        ActionKind::InitiateHedge,
        ActionKind::GenerateReport,
    ];
}

/// Per-asset and per-sector weight ceilings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplianceCaps {
    pub max_asset_weight: f64,
    pub max_sector_weight: f64,
}

impl Default for ComplianceCaps {
    fn default() -> Self {
        ComplianceCaps {
            max_asset_weight: 0.25,
            max_sector_weight: 0.6,
        }
    }
}

/// An executable instruction. Serialized with a `kind` tag, e.g.
/// `{"kind":"buy","symbol":"AAA","quantity":10}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    Buy {
        symbol: String,
        quantity: u64,
    },
    Sell {
        symbol: String,
        quantity: u64,
    },
    Hold,
    /// Move a position to `target_quantity`. With a `limit`, a buy fills only when the
    /// close is at or below it and a sell only when the close is at or above it.
    AdjustQuantityPrice {
        symbol: String,
        target_quantity: u64,
        #[serde(default)]
        limit: Option<f64>,
    },
    /// Replace the stops on a held symbol.
    SetStops {
        symbol: String,
        #[serde(default)]
        stop_loss: Option<f64>,
        #[serde(default)]
        take_profit: Option<f64>,
    },
    /// Scale every holding so the invested fraction of net value becomes `invested`.
    AdjustRiskExposure {
        invested: f64,
    },
    /// Trade toward `weights` for the listed symbols only; other holdings are untouched.
    ExecuteAllocation {
        weights: BTreeMap<String, f64>,
    },
    /// Sell down holdings above the caps.
    EnforceCompliance {
        #[serde(default)]
        caps: ComplianceCaps,
    },
    /// Trade toward `weights`; holdings not listed are liquidated.
    Rebalance {
        weights: BTreeMap<String, f64>,
    },
    MarketScan,
    /// Raise cash by selling `fraction` of every holding (rounded down to whole shares).
    InitiateHedge {
        fraction: f64,
    },
    GenerateReport,
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Buy { .. } | Action::Sell { .. } | Action::Hold => ActionKind::BuySellHold,
            Action::AdjustQuantityPrice { .. } => ActionKind::AdjustQuantityPrice,
            Action::SetStops { .. } => ActionKind::SetStops,
            Action::AdjustRiskExposure { .. } => ActionKind::AdjustRiskExposure,
            Action::ExecuteAllocation { .. } => ActionKind::ExecuteAllocation,
            Action::EnforceCompliance { .. } => ActionKind::EnforceCompliance,
            Action::Rebalance { .. } => ActionKind::Rebalance,
            Action::MarketScan => ActionKind::MarketScan,
            Action::InitiateHedge { .. } => ActionKind::InitiateHedge,
            Action::GenerateReport => ActionKind::GenerateReport,
        }
    }

    /// Short label used in ledgers and transcripts.
    pub fn label(&self) -> &'static str {
        match self {
            Action::Buy { .. } => "buy",
            Action::Sell { .. } => "sell",
            Action::Hold => "hold",
            Action::AdjustQuantityPrice { .. } => "adjust_quantity_price",
            Action::SetStops { .. } => "set_stops",
            Action::AdjustRiskExposure { .. } => "adjust_risk_exposure",
            Action::ExecuteAllocation { .. } => "execute_allocation",
            Action::EnforceCompliance { .. } => "enforce_compliance",
            Action::Rebalance { .. } => "rebalance",
            Action::MarketScan => "market_scan",
            Action::InitiateHedge { .. } => "initiate_hedge",
            Action::GenerateReport => "generate_report",
        }
    }

    /// Payload checks that need no market data.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PortfolioError::InvalidAction(m));
        let frac = |name: &str, x: f64| {
            if x.is_finite() && (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                bad(format!("{name} must be in [0, 1], got {x}"))
            }
        };
        match self {
            Action::Buy { quantity: 0, .. } | Action::Sell { quantity: 0, .. } => {
                bad("quantity must be positive".into())
            }
            Action::AdjustQuantityPrice { limit: Some(l), .. } if !(l.is_finite() && *l > 0.0) => {
                bad(format!("limit must be positive, got {l}"))
            }
            Action::SetStops {
                stop_loss,
                take_profit,
                ..
            } => {
                for p in stop_loss.iter().chain(take_profit.iter()) {
                    if !(p.is_finite() && *p > 0.0) {
                        return bad(format!("stop price must be positive, got {p}"));
                    }
                }
                Ok(())
            }
            Action::AdjustRiskExposure { invested } => frac("invested", *invested),
            Action::InitiateHedge { fraction } => frac("fraction", *fraction),
            Action::EnforceCompliance { caps } => {
                frac("max_asset_weight", caps.max_asset_weight)?;
                frac("max_sector_weight", caps.max_sector_weight)
            }
            Action::ExecuteAllocation { weights } | Action::Rebalance { weights } => validate_weights(weights),
            _ => Ok(()),
        }
    }
}

pub(crate) fn validate_weights(weights: &BTreeMap<String, f64>) -> Result<()> {
    let mut total = 0.0;
    for (s, w) in weights {
        if !(w.is_finite() && *w >= 0.0) {
            return Err(PortfolioError::InvalidAction(format!("weight for {s} must be non-negative, got {w}")));
        }
        total += w;
    }
    if total > 1.0 + 1e-9 {
        return Err(PortfolioError::InvalidAction(format!("weights sum to {total} > 1")));
    }
    Ok(())
}

/// Clips each weight to the asset cap, then scales down any sector whose total exceeds the
/// sector cap. Removed weight becomes cash; nothing is redistributed. Symbols without a
/// sector are grouped under their own name.
pub fn clip_weights(
    weights: &BTreeMap<String, f64>,
    caps: &ComplianceCaps,
    sector_of: impl Fn(&str) -> Option<String>,
) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = weights
        .iter()
        .map(|(s, w)| (s.clone(), w.min(caps.max_asset_weight)))
        .collect();
    let mut by_sector: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for s in out.keys() {
        by_sector.entry(sector_of(s).unwrap_or_else(|| s.clone())).or_default().push(s.clone());
    }
    for members in by_sector.values() {
        let total: f64 = members.iter().map(|s| out[s]).sum();
        if total > caps.max_sector_weight {
            let f = caps.max_sector_weight / total;
            for s in members {
                *out.get_mut(s).unwrap() *= f;
            }
        }
    }
    out
}
