use std::collections::BTreeSet;

use crate::portfolio::ActionKind;

/// One entry of the closed analysis-tool catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tool {
    pub id: u8,
    pub name: &'static str,
}

const fn t(id: u8, name: &'static str) -> Tool {
    Tool { id, name }
}

pub const TOOLS: [Tool; 26] = [
    t(1, "Technical Indicator Analysis"),
    t(2, "Sentiment Analysis from Social Media"),
    t(3, "Algorithmic Trading Strategies"),
    t(4, "Regulatory Change Impact Analysis"),
    t(5, "Economic Indicator Forecasting"),
    t(6, "Corporate Earnings Analysis"),
    t(7, "NASDAQ-100 Index Component Tracking"),
    t(8, "Sector Performance Evaluation"),
    t(9, "Risk-Adjusted Return Analysis"),
    t(10, "Portfolio Diversification Tools"),
    t(11, "Central Bank Policy Analysis"),
    t(12, "Global Macroeconomic Trend Analysis"),
    t(13, "Currency Pair Correlation Matrix"),
    t(14, "Interest Rate Differential Analysis"),
    t(15, "Asset Allocation Optimization"),
    t(16, "Risk Management Frameworks"),
    t(17, "Portfolio Stress Testing"),
    t(18, "Derivatives Strategy Formulation"),
    t(19, "Fund Performance Evaluation"),
    t(20, "FinReport"),
    t(21, "Trend Forecasting"),
    t(22, "Volatility Assessment Tool"),
    t(23, "Simulation Optimization Toolkit"),
    t(24, "Strategy Analysis Suite"),
    t(25, "RiskAnalyzer Toolkit"),
    t(26, "Risk Score Assessment Tool"),
];

impl Tool {
    /// Case-insensitive lookup; profile files are not consistent about capitalization.
    pub fn lookup(name: &str) -> Option<Tool> {
        let name = name.trim();
        TOOLS.iter().copied().find(|t| t.name.eq_ignore_ascii_case(name))
    }
}

/// The action kinds a named profile permission grants. `None` for names outside the
/// catalog.
pub fn action_grants(permission: &str) -> Option<&'static [ActionKind]> {
    use ActionKind::*;
    let kinds: &'static [ActionKind] = match permission.trim() {
        "MakeFinalInvestmentDecisions" => &[BuySellHold, AdjustQuantityPrice],
        "AllocateInvestmentBudget" => &[ExecuteAllocation],
        "ApproveStrategies" => &[Rebalance],
        "MonitorPortfolioPerformance" => &[MarketScan, GenerateReport],
        "AdjustPortfolioAllocation" => &[Rebalance, AdjustRiskExposure],
        "EngageInRiskManagement" => &[SetStops, InitiateHedge, EnforceCompliance, AdjustRiskExposure],
        "DevelopStrategy" | "AdjustStrategyParameters" | "OptimizeStrategy" => &[GenerateReport],
        "SimulateStrategy" | "AnalyzeStrategyPerformance" => &[MarketScan, GenerateReport],
        "DeployStrategy" => &[ExecuteAllocation],
        "EvaluateRiskExposure" | "TriggerRiskAlerts" | "PerformStressTesting" => &[GenerateReport],
        "ImplementRiskControls" => &[SetStops, EnforceCompliance],
        "MonitorPortfolioRisk" => &[MarketScan],
        "AdjustRiskParameters" => &[AdjustRiskExposure],
        "ConductMarketResearch" | "AnalyzeIndustryTrends" => &[MarketScan],
        "EvaluateCompanyPerformance" | "GenerateInvestmentReports" | "ProvideMarketUpdates" => &[GenerateReport],
        "RecommendInvestmentActions" => &[GenerateReport],
        _ => return None,
    };
    Some(kinds)
}

pub(crate) fn granted(permissions: &[String]) -> BTreeSet<ActionKind> {
    permissions
        .iter()
        .filter_map(|p| action_grants(p))
        .flat_map(|k| k.iter().copied())
        .collect()
}
