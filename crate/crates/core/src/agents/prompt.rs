use std::collections::{BTreeMap, BTreeSet};

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use super::backend::Task;
use super::{AgentError, Result};
use crate::marketdata::MarketView;

/// Default character budget for a summarized query.
pub const DEFAULT_QUERY_BUDGET: usize = 1200;

/// The bundled prompt templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateKind {
    MarketAnalysis,
    StrategyDevelopment,
    RiskManagement,
    InvestmentDecision,
    ReportSynthesis,
    Sentiment,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 6] = [
        TemplateKind::MarketAnalysis,
        TemplateKind::StrategyDevelopment,
        TemplateKind::RiskManagement,
        TemplateKind::InvestmentDecision,
        TemplateKind::ReportSynthesis,
        TemplateKind::Sentiment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TemplateKind::MarketAnalysis => "market_analysis",
            TemplateKind::StrategyDevelopment => "strategy_development",
            TemplateKind::RiskManagement => "risk_management",
            TemplateKind::InvestmentDecision => "investment_decision",
            TemplateKind::ReportSynthesis => "report_synthesis",
            TemplateKind::Sentiment => "sentiment",
        }
    }

    fn source(self) -> &'static str {
        match self {
            TemplateKind::MarketAnalysis => include_str!("../../assets/templates/market_analysis.txt"),
            TemplateKind::StrategyDevelopment => include_str!("../../assets/templates/strategy_development.txt"),
            TemplateKind::RiskManagement => include_str!("../../assets/templates/risk_management.txt"),
            TemplateKind::InvestmentDecision => include_str!("../../assets/templates/investment_decision.txt"),
            TemplateKind::ReportSynthesis => include_str!("../../assets/templates/report_synthesis.txt"),
            TemplateKind::Sentiment => include_str!("../../assets/templates/sentiment.txt"),
        }
    }

    /// The public slot set of each template.
    pub fn slots(self) -> &'static [&'static str] {
        match self {
            TemplateKind::MarketAnalysis => &["profile", "role", "current_prices", "recent_news", "tool_results"],
            TemplateKind::StrategyDevelopment => {
                &["profile", "role", "strategy_parameters", "simulation_data", "performance_metrics"]
            }
            TemplateKind::RiskManagement => &["profile", "role", "risk_indicators", "risk_events"],
            TemplateKind::InvestmentDecision => &[
                "profile",
                "role",
                "investment_options",
                "market_data",
                "memories",
                "permitted_actions",
                "proposal",
            ],
            TemplateKind::ReportSynthesis => &["profile", "role", "meeting", "contributions"],
            TemplateKind::Sentiment => &["profile", "role", "headlines"],
        }
    }

    pub fn task(self) -> Task {
        match self {
            TemplateKind::MarketAnalysis => Task::MarketAnalysis,
            TemplateKind::StrategyDevelopment => Task::StrategyDevelopment,
            TemplateKind::RiskManagement => Task::RiskManagement,
            TemplateKind::InvestmentDecision => Task::Decision,
            TemplateKind::ReportSynthesis => Task::Synthesis,
            TemplateKind::Sentiment => Task::Sentiment,
        }
    }

    pub fn template(self) -> PromptTemplate {
        PromptTemplate::new(self.name(), self.source()).expect("bundled template is well-formed")
    }
}

/// Text with `{slot}` placeholders; `{{` and `}}` are literal braces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub name: String,
    text: String,
    slots: BTreeSet<String>,
}

enum Piece<'a> {
    Text(&'a str),
    Slot(&'a str),
}

fn pieces<'a>(name: &str, text: &'a str) -> Result<Vec<Piece<'a>>> {
    let bad = |m: String| AgentError::Template {
        name: name.to_string(),
        message: m,
    };
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(i) = rest.find(['{', '}']) {
        let (head, tail) = rest.split_at(i);
        out.push(Piece::Text(head));
        if tail.starts_with("{{") {
            out.push(Piece::Text("{"));
            rest = &tail[2..];
        } else if tail.starts_with("}}") {
            out.push(Piece::Text("}"));
            rest = &tail[2..];
        } else if tail.starts_with('}') {
            return Err(bad(format!("stray '}}' at byte {}", text.len() - tail.len())));
        } else {
            let end = tail.find('}').ok_or_else(|| bad("unterminated slot".into()))?;
            let slot = &tail[1..end];
            if slot.is_empty() || !slot.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(bad(format!("invalid slot name {slot:?}")));
            }
            out.push(Piece::Slot(slot));
            rest = &tail[end + 1..];
        }
    }
    out.push(Piece::Text(rest));
    Ok(out)
}

impl PromptTemplate {
    pub fn new(name: &str, text: &str) -> Result<Self> {
        let slots = pieces(name, text)?
            .into_iter()
            .filter_map(|p| match p {
                Piece::Slot(s) => Some(s.to_string()),
                Piece::Text(_) => None,
            })
            .collect();
        Ok(PromptTemplate {
            name: name.to_string(),
            text: text.to_string(),
            slots,
        })
    }

    pub fn slots(&self) -> &BTreeSet<String> {
        &self.slots
    }

    /// Fills every slot. Missing and unknown values are both errors.
    pub fn render(&self, values: &BTreeMap<&str, String>) -> Result<String> {
        let bad = |m: String| AgentError::Template {
            name: self.name.clone(),
            message: m,
        };
        if let Some(extra) = values.keys().find(|k| !self.slots.contains(**k)) {
            return Err(bad(format!("no slot named {extra:?}")));
        }
        let mut out = String::with_capacity(self.text.len());
        for p in pieces(&self.name, &self.text)? {
            match p {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(s) => out.push_str(values.get(s).ok_or_else(|| bad(format!("slot {s:?} not filled")))?),
            }
        }
        Ok(out.trim_end().to_string())
    }
}

/// Inputs of a summarized query: the day, the largest movers and the day's headlines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryInputs {
    pub date: NaiveDate,
    /// (symbol, daily return), largest absolute move first.
    pub movers: Vec<(String, f64)>,
    pub headlines: Vec<String>,
}

impl QueryInputs {
    /// The `top` largest close-to-close moves at the cursor and the headlines published
    /// since the previous session.
    pub fn from_view(view: &MarketView, top: usize) -> QueryInputs {
        let mut movers: Vec<(String, f64)> = view
            .universe()
            .iter()
            .filter_map(|s| {
                let h = view.trailing(s, 2);
                match h {
                    [a, b] if b.date == view.cursor() && a.close > 0.0 => Some((s.clone(), b.close / a.close - 1.0)),
                    _ => None,
                }
            })
            .collect();
        movers.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(&b.0)));
        movers.truncate(top);
        let cal = view.calendar();
        let since = match cal {
            [.., prev, _] => *prev + Days::new(1),
            _ => view.cursor(),
        };
        QueryInputs {
            date: view.cursor(),
            movers,
            headlines: view.news_since(since).iter().map(|n| n.headline.clone()).collect(),
        }
    }
}

fn clip(s: &str, max: usize) -> String {
    if s.chars().count() <= max {
        return s.to_string();
    }
    s.chars().take(max).collect()
}

/// Renders the query text. Headlines are added in order while they fit within `budget`
/// characters; the remainder is reported as a count.
pub fn summarize_query(inputs: &QueryInputs, budget: usize) -> String {
    let mut out = format!("Date: {}\n", inputs.date);
    if inputs.movers.is_empty() {
        out.push_str("Top movers: none\n");
    } else {
        let movers: Vec<String> = inputs
            .movers
            .iter()
            .map(|(s, r)| format!("{s} {:+.2}%", r * 100.0))
            .collect();
        out.push_str(&format!("Top movers: {}\n", movers.join(", ")));
    }
    if inputs.headlines.is_empty() {
        out.push_str("Headlines: no significant headlines");
        return clip(&out, budget);
    }
    let n = inputs.headlines.len();
    out.push_str(&format!("Headlines ({n}):"));
    let mut used = 0;
    for h in &inputs.headlines {
        let line = format!("\n- {h}");
        // room for the worst-case count annotation
        let reserve = format!("\n(+{n} more)").chars().count();
        if out.chars().count() + line.chars().count() + reserve > budget {
            break;
        }
        out.push_str(&line);
        used += 1;
    }
    if used < n {
        out.push_str(&format!("\n(+{} more)", n - used));
    }
    clip(&out, budget)
}
