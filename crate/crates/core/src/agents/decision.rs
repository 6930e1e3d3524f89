use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::backend::{ChatBackend, ChatRequest};
use super::memory::{Embedder, MemoryBank, MemoryRecord, StoreKind};
use super::profile::AgentProfile;
use super::prompt::TemplateKind;
use super::{AgentError, Result};
use crate::portfolio::Action;

/// Extra attempts after an unusable reply.
pub const DEFAULT_RETRIES: usize = 2;

/// The outermost `{ ... }` span of a reply, tolerating prose or code fences around it.
pub(crate) fn json_object(text: &str) -> Option<&str> {
    let start = text.find('{')?;
    let end = text.rfind('}')?;
    (end > start).then(|| &text[start..=end])
}

/// The reply's JSON object, if it contains one.
pub fn parse_json_object(text: &str) -> Option<Value> {
    serde_json::from_str(json_object(text)?).ok().filter(Value::is_object)
}

fn snake_case(kind: &str) -> String {
    let kind = kind.trim();
    if kind.contains(['_', ' ', '-']) || !kind.chars().any(|c| c.is_ascii_uppercase()) {
        return kind.to_ascii_lowercase().replace([' ', '-'], "_");
    }
    let mut out = String::new();
    for (i, c) in kind.chars().enumerate() {
        if c.is_ascii_uppercase() && i > 0 {
            out.push('_');
        }
        out.push(c.to_ascii_lowercase());
    }
    out
}

/// Parses a reply into an [`Action`]. Accepts the object bare or under an `"action"` key,
/// and the kind in snake or camel case (`"set_stops"`, `"SetStops"`).
pub fn parse_action(reply: &str) -> std::result::Result<Action, String> {
    let body = json_object(reply).ok_or("no JSON object in reply")?;
    let mut v: Value = serde_json::from_str(body).map_err(|e| format!("invalid JSON: {e}"))?;
    if let Some(inner) = v.get("action").filter(|a| a.is_object()).cloned() {
        v = inner;
    }
    let obj = v.as_object_mut().ok_or("reply is not an object")?;
    let kind = obj.get("kind").and_then(Value::as_str).ok_or("missing \"kind\"")?;
    let kind = snake_case(kind);
    obj.insert("kind".into(), Value::String(kind));
    let action: Action = serde_json::from_value(v).map_err(|e| format!("not an action: {e}"))?;
    action.validate().map_err(|e| e.to_string())?;
    Ok(action)
}

/// What the decision prompt is built from.
#[derive(Debug, Clone, Default)]
pub struct DecisionContext<'a> {
    /// The summarized query for the day.
    pub query: &'a str,
    /// Retrieved similar cases, most similar first.
    pub memories: &'a [&'a MemoryRecord],
    /// Description of the strategy or opportunities under consideration.
    pub options: String,
    /// The action the strategy calls for, if any.
    pub proposal: Option<&'a Action>,
    pub retries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub action: Action,
    pub attempts: usize,
    /// True when the action is the Hold fallback rather than a parsed reply.
    pub fallback: bool,
    pub audit: Vec<String>,
    pub prompt: String,
    pub replies: Vec<String>,
}

fn memory_digest(memories: &[&MemoryRecord]) -> String {
    if memories.is_empty() {
        return "none".into();
    }
    memories
        .iter()
        .map(|m| format!("- [{}] {}", m.timestamp, m.text.replace('\n', " | ")))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Renders the decision prompt for `agent`, asks the backend and parses the reply.
///
/// Unusable replies and transport failures are retried up to `ctx.retries` times, then the
/// decision falls back to Hold. A parsed action outside the agent's permissions is replaced
/// by Hold at once. Every retry, rejection and fallback is recorded in the audit trail.
pub fn decide_action(agent: &AgentProfile, ctx: &DecisionContext, backend: &dyn ChatBackend) -> Result<Decision> {
    if let Some(p) = ctx.proposal {
        if !agent.permits(p) {
            return Err(AgentError::Config(format!("{} may not propose {}", agent.name, p.label())));
        }
    }
    let kinds: Vec<String> = agent
        .action_kinds()
        .iter()
        .map(|k| serde_json::to_value(k).expect("kind serializes").as_str().unwrap_or_default().to_string())
        .collect();
    let proposal = ctx
        .proposal
        .map(|p| serde_json::to_string(p).expect("action serializes"))
        .unwrap_or_default();
    let values = BTreeMap::from([
        ("profile", agent.name.clone()),
        ("role", agent.role_phrase()),
        ("investment_options", ctx.options.clone()),
        ("market_data", ctx.query.to_string()),
        ("memories", memory_digest(ctx.memories)),
        ("permitted_actions", kinds.join(", ")),
        ("proposal", proposal),
    ]);
    let prompt = TemplateKind::InvestmentDecision.template().render(&values)?;
    let request = ChatRequest {
        task: TemplateKind::InvestmentDecision.task(),
        system: agent.description.clone(),
        prompt: prompt.clone(),
    };
    let mut audit = Vec::new();
    let mut replies = Vec::new();
    for attempt in 1..=ctx.retries + 1 {
        let reply = match backend.complete(&request) {
            Ok(r) => r,
            Err(e) => {
                audit.push(format!("attempt {attempt}: backend error: {e}"));
                continue;
            }
        };
        replies.push(reply.clone());
        match parse_action(&reply) {
            Ok(action) if agent.permits(&action) => {
                return Ok(Decision {
                    action,
                    attempts: attempt,
                    fallback: false,
                    audit,
                    prompt,
                    replies,
                })
            }
            Ok(action) => {
                let msg = format!(
                    "attempt {attempt}: {} is not permitted to {}; holding",
                    agent.name,
                    action.label()
                );
                tracing::warn!("{msg}");
                audit.push(msg);
                return Ok(Decision {
                    action: Action::Hold,
                    attempts: attempt,
                    fallback: true,
                    audit,
                    prompt,
                    replies,
                });
            }
            Err(e) => audit.push(format!("attempt {attempt}: unparseable reply: {e}")),
        }
    }
    let msg = format!("no usable reply after {} attempts; holding", ctx.retries + 1);
    tracing::warn!("{}: {msg}", agent.name);
    audit.push(msg);
    Ok(Decision {
        action: Action::Hold,
        attempts: ctx.retries + 1,
        fallback: true,
        audit,
        prompt,
        replies,
    })
}

/// Stores a reflection on an action taken on `decided` whose outcome `outcome` (a simple
/// return) was observed by `cursor`.
pub fn record_reflection(
    bank: &mut MemoryBank,
    embedder: &dyn Embedder,
    decided: NaiveDate,
    cursor: NaiveDate,
    query: &str,
    action: &Action,
    outcome: f64,
) -> Result<MemoryRecord> {
    if cursor <= decided {
        return Err(AgentError::Memory(format!(
            "outcome of the {decided} action is not observable at {cursor}"
        )));
    }
    let verdict = if outcome > 0.0 {
        "gain"
    } else if outcome < 0.0 {
        "loss"
    } else {
        "flat result"
    };
    let text = format!(
        "Reflection on {decided}: action {} {} led to a {verdict} of {:+.2}% by {cursor}. State: {}",
        action.label(),
        serde_json::to_string(action).expect("action serializes"),
        outcome * 100.0,
        query.replace('\n', " | "),
    );
    let metadata = BTreeMap::from([
        ("kind".to_string(), "reflection".to_string()),
        ("action".to_string(), action.label().to_string()),
        ("outcome".to_string(), format!("{outcome:.6}")),
        ("decided".to_string(), decided.to_string()),
    ]);
    bank.insert(embedder, StoreKind::MarketInfo, decided, cursor, text, metadata)
        .cloned()
}
