use std::collections::{BTreeMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::memory::Embedder;
use super::profile::AgentProfile;
use super::prompt::TemplateKind;
use crate::marketdata::NewsItem;
use crate::risk::{LexiconSentiment, SentimentProvider};

pub const DEFAULT_TEMPERATURE: f64 = 0.7;
/// Environment variable holding the bearer token for the http backend.
pub const API_KEY_ENV: &str = "FUNDSIM_API_KEY";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    /// Connection, timeout or server failure; worth retrying.
    #[error("transport: {0}")]
    Transport(String),
    #[error("unexpected response: {0}")]
    Response(String),
    #[error("scripted replies exhausted")]
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    MarketAnalysis,
    StrategyDevelopment,
    RiskManagement,
    Decision,
    Synthesis,
    Sentiment,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::MarketAnalysis => "market_analysis",
            Task::StrategyDevelopment => "strategy_development",
            Task::RiskManagement => "risk_management",
            Task::Decision => "decision",
            Task::Synthesis => "synthesis",
            Task::Sentiment => "sentiment",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub task: Task,
    /// The agent's standing instructions (its profile description).
    pub system: String,
    pub prompt: String,
}

/// A chat-completion provider.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, BackendError>;
    /// Completion calls made so far.
    fn calls(&self) -> u64;
    fn describe(&self) -> String;
}

fn fnv(seed: u64, text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Deterministic stand-in for a model: the reply is a pure function of the request and
/// the seed.
///
/// Overrides are checked first, in order: the first whose needle occurs in the prompt
/// supplies the reply. Otherwise decision prompts echo their `<proposal>` block (or Hold
/// when there is none), sentiment prompts answer a neutral `tau`, and analysis prompts get
/// a JSON digest of the prompt.
#[derive(Debug, Default)]
pub struct ScriptedBackend {
    pub seed: u64,
    pub overrides: Vec<(String, String)>,
    calls: AtomicU64,
}

impl ScriptedBackend {
    pub fn new(seed: u64) -> Self {
        ScriptedBackend {
            seed,
            overrides: Vec::new(),
            calls: AtomicU64::new(0),
        }
    }

    pub fn with_override(mut self, needle: &str, reply: &str) -> Self {
        self.overrides.push((needle.to_string(), reply.to_string()));
        self
    }

    /// The reply without counting a call.
    pub fn reply(&self, request: &ChatRequest) -> String {
        if let Some((_, r)) = self.overrides.iter().find(|(n, _)| request.prompt.contains(n.as_str())) {
            return r.clone();
        }
        match request.task {
            Task::Decision => {
                let proposal = request
                    .prompt
                    .split_once("<proposal>")
                    .and_then(|(_, rest)| rest.split_once("</proposal>"))
                    .map(|(p, _)| p.trim())
                    .filter(|p| !p.is_empty());
                proposal.unwrap_or(r#"{"kind":"hold"}"#).to_string()
            }
            Task::Sentiment => r#"{"tau":0.0}"#.to_string(),
            task => {
                // skip the "You are X, a Role." opener
                let body = request.prompt.split_once(". ").map_or(request.prompt.as_str(), |(_, b)| b);
                let summary: String = body.chars().take(160).collect();
                json!({
                    "task": task.name(),
                    "summary": summary,
                    "ref": format!("{:016x}", fnv(self.seed, &format!("{}\n{}", request.system, request.prompt))),
                })
                .to_string()
            }
        }
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(self.reply(request))
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn describe(&self) -> String {
        format!("scripted(seed={})", self.seed)
    }
}

/// Replays a fixed queue of replies or failures, then reports exhaustion.
#[derive(Debug, Default)]
pub struct SequenceBackend {
    replies: Mutex<VecDeque<Result<String, BackendError>>>,
    calls: AtomicU64,
}

impl SequenceBackend {
    pub fn new(replies: impl IntoIterator<Item = Result<String, BackendError>>) -> Self {
        SequenceBackend {
            replies: Mutex::new(replies.into_iter().collect()),
            calls: AtomicU64::new(0),
        }
    }

    pub fn ok<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        Self::new(replies.into_iter().map(|s| Ok(s.into())))
    }
}

impl ChatBackend for SequenceBackend {
    fn complete(&self, _request: &ChatRequest) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.replies
            .lock()
            .expect("sequence lock")
            .pop_front()
            .unwrap_or(Err(BackendError::Exhausted))
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn describe(&self) -> String {
        "sequence".into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpConfig {
    /// Full URL of the chat-completions endpoint.
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub timeout_secs: u64,
    /// Full URL of the embeddings endpoint, for [`HttpBackend`] used as an [`Embedder`].
    pub embedding_endpoint: Option<String>,
    pub embedding_model: Option<String>,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            model: "gpt-4o".into(),
            temperature: DEFAULT_TEMPERATURE,
            timeout_secs: 60,
            embedding_endpoint: None,
            embedding_model: None,
        }
    }
}

/// Chat-completions client. The bearer token, if any, is read from [`API_KEY_ENV`].
#[derive(Debug)]
pub struct HttpBackend {
    pub config: HttpConfig,
    agent: ureq::Agent,
    api_key: Option<String>,
    calls: AtomicU64,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpBackend {
            config,
            agent,
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
            calls: AtomicU64::new(0),
        }
    }

    fn post(&self, url: &str, body: &Value) -> Result<Value, BackendError> {
        let mut req = self.agent.post(url).header("Content-Type", "application/json");
        if let Some(k) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {k}"));
        }
        let mut resp = req.send_json(body).map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        if status >= 500 || status == 429 {
            return Err(BackendError::Transport(format!("http status {status}")));
        }
        if status >= 400 {
            let text = resp.body_mut().read_to_string().unwrap_or_default();
            return Err(BackendError::Response(format!("http status {status}: {text}")));
        }
        resp.body_mut()
            .read_json::<Value>()
            .map_err(|e| BackendError::Response(e.to_string()))
    }
}

impl ChatBackend for HttpBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let body = json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.prompt},
            ],
        });
        let v = self.post(&self.config.endpoint, &body)?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| BackendError::Response("missing choices[0].message.content".into()))
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    fn describe(&self) -> String {
        format!("http({} model={} temperature={})", self.config.endpoint, self.config.model, self.config.temperature)
    }
}

impl Embedder for HttpBackend {
    fn embed(&self, text: &str) -> Result<Vec<f64>, BackendError> {
        let url = self
            .config
            .embedding_endpoint
            .as_deref()
            .ok_or_else(|| BackendError::Response("no embedding endpoint configured".into()))?;
        let model = self.config.embedding_model.clone().unwrap_or_else(|| self.config.model.clone());
        let v = self.post(url, &json!({"model": model, "input": text}))?;
        v.pointer("/data/0/embedding")
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(Value::as_f64).collect())
            .ok_or_else(|| BackendError::Response("missing data[0].embedding".into()))
    }
}

/// News sentiment asked of a chat backend, falling back to the lexicon score when the
/// reply is unusable.
pub struct LlmSentiment {
    pub backend: Arc<dyn ChatBackend>,
    pub analyst: AgentProfile,
    pub fallback: LexiconSentiment,
}

impl LlmSentiment {
    fn ask(&self, news: &[NewsItem], symbols: &[String]) -> Option<f64> {
        let headlines: Vec<&str> = news
            .iter()
            .filter(|n| symbols.is_empty() || symbols.iter().any(|s| n.mentions(s)))
            .map(|n| n.headline.as_str())
            .collect();
        if headlines.is_empty() {
            return Some(0.0);
        }
        let values = BTreeMap::from([
            ("profile", self.analyst.name.clone()),
            ("role", self.analyst.role_phrase()),
            ("headlines", headlines.join(" | ")),
        ]);
        let prompt = TemplateKind::Sentiment.template().render(&values).ok()?;
        let reply = self
            .backend
            .complete(&ChatRequest {
                task: Task::Sentiment,
                system: self.analyst.description.clone(),
                prompt,
            })
            .ok()?;
        let v: Value = serde_json::from_str(super::decision::json_object(&reply)?).ok()?;
        v.get("tau").and_then(Value::as_f64).filter(|t| t.is_finite()).map(|t| t.clamp(-1.0, 1.0))
    }
}

impl SentimentProvider for LlmSentiment {
    fn score(&self, news: &[NewsItem], symbols: &[String]) -> f64 {
        self.ask(news, symbols)
            .unwrap_or_else(|| self.fallback.score(news, symbols))
    }
}
