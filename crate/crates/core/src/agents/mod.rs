//! Agent profiles, memory stores, chat backends, prompt rendering, decisions and the
//! dual-reward policy selection.

mod backend;
mod catalog;
mod decision;
mod memory;
mod policy;
mod profile;
mod prompt;

use thiserror::Error;

pub use backend::{
    BackendError, ChatBackend, ChatRequest, HttpBackend, HttpConfig, LlmSentiment, ScriptedBackend, SequenceBackend,
    Task, API_KEY_ENV, DEFAULT_TEMPERATURE,
};
pub use catalog::{action_grants, Tool, TOOLS};
pub use decision::{decide_action, parse_action, parse_json_object, record_reflection, Decision, DecisionContext, DEFAULT_RETRIES};
pub use memory::{
    cosine, embed, Embedder, MemoryBank, MemoryRecord, StoreKind, StubEmbedder, EMBEDDING_DIM, RETRIEVE_K,
};
pub use policy::{
    adaptive_weights, logistic, risk_adjusted_reward, score_policies, CandidateRewards, PolicyConfig, PolicyRanking,
    PolicyState, RiskMix, RATIO_CLIP, TIE_TOLERANCE,
};
pub use profile::{load_profile, parse_profile, shipped_profiles, AgentProfile, Team};
pub use prompt::{summarize_query, PromptTemplate, QueryInputs, TemplateKind, DEFAULT_QUERY_BUDGET};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("profile {origin}: {message}")]
    Profile { origin: String, message: String },
    #[error("template {name}: {message}")]
    Template { name: String, message: String },
    #[error("memory: {0}")]
    Memory(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Backend(#[from] BackendError),
}

pub type Result<T> = std::result::Result<T, AgentError>;
