//! Language-model access.
//!
//! Three backends sit behind one [`LmGateway`]:
//!
//! * `remote` sends chat-completion requests at temperature 0,
//! * `replay` answers from recorded fixtures keyed by prompt hash,
//! * `heuristic` never builds a prompt; callers run their deterministic
//!   fallback instead.
//!
//! Callers go through [`LmGateway::semantic`], which picks the heuristic or
//! the model path, parses the response grammar and, when the replay store is
//! recording, fills misses with the heuristic answer rendered in the same
//! grammar.

mod budget;
mod remote;
mod replay;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use budget::{estimate_tokens, fit_to_budget, PromptPart, PromptRequest, PART_SEPARATOR};
pub use remote::{request_body, RemoteClient, MAX_RETRIES};
pub use replay::{ReplayRecord, ReplayStore};

pub const ENV_ENDPOINT: &str = "DECKFORGE_LM_ENDPOINT";
pub const ENV_KEY: &str = "DECKFORGE_LM_KEY";
pub const ENV_MODEL: &str = "DECKFORGE_LM_MODEL";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LmError {
    #[error("prompt needs ~{estimated} tokens, budget is {budget}")]
    BudgetExceeded { estimated: usize, budget: usize },
    #[error("transport failure: {0}")]
    TransportFailure(String),
    #[error("no replay fixture for prompt {hash}")]
    ReplayMiss { hash: String },
    #[error("heuristic backend does not serve completions")]
    HeuristicBackend,
    #[error("invalid language model config: {0}")]
    InvalidConfig(String),
    #[error("replay fixtures: {0}")]
    Fixture(String),
}

/// Failure of a model-backed operation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemanticError {
    #[error("language model backend failed: {0}")]
    BackendFailure(#[from] LmError),
    #[error("unparseable model response: {0}")]
    UnparseableResponse(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Remote,
    #[default]
    Heuristic,
    Replay,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "remote" => Ok(Self::Remote),
            "heuristic" => Ok(Self::Heuristic),
            "replay" => Ok(Self::Replay),
            other => Err(format!("unknown backend {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LmConfig {
    pub endpoint: String,
    pub model_name: String,
    pub temperature: f64,
    pub token_budget: usize,
    pub reserved_response_tokens: usize,
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
    pub backend_kind: BackendKind,
    pub replay_path: Option<PathBuf>,
    /// In-flight cap for concurrent remote requests.
    pub max_in_flight: usize,
    /// Run the heuristic when the model path fails instead of surfacing
    /// `BackendFailure`.
    pub fallback_to_heuristic: bool,
    pub timeout_secs: u64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model_name: "gpt-3.5-turbo-16k".into(),
            temperature: 0.0,
            token_budget: 16_000,
            reserved_response_tokens: 1_000,
            api_key: None,
            backend_kind: BackendKind::Heuristic,
            replay_path: None,
            max_in_flight: 4,
            fallback_to_heuristic: false,
            timeout_secs: 120,
        }
    }
}

impl LmConfig {
    pub fn heuristic() -> Self {
        Self::default()
    }

    pub fn replay(path: impl Into<PathBuf>) -> Self {
        Self { backend_kind: BackendKind::Replay, replay_path: Some(path.into()), ..Self::default() }
    }

    /// Reads a TOML config file; keys match the field names.
    pub fn from_toml_file(path: &Path) -> Result<Self, LmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LmError::InvalidConfig(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| LmError::InvalidConfig(e.to_string()))
    }

    pub fn apply_env(&mut self) {
        self.apply_env_from(|key| std::env::var(key).ok());
    }

    pub fn apply_env_from(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        if let Some(endpoint) = lookup(ENV_ENDPOINT) {
            self.endpoint = endpoint;
        }
        if let Some(key) = lookup(ENV_KEY) {
            self.api_key = Some(key);
        }
        if let Some(model) = lookup(ENV_MODEL) {
            self.model_name = model;
        }
    }

    pub fn validate(&self) -> Result<(), LmError> {
        if self.token_budget <= 1000 {
            return Err(LmError::InvalidConfig(format!("token_budget {} must exceed 1000", self.token_budget)));
        }
        if self.reserved_response_tokens >= self.token_budget {
            return Err(LmError::InvalidConfig("reserved_response_tokens must be below token_budget".into()));
        }
        if self.backend_kind == BackendKind::Remote && self.temperature != 0.0 {
            return Err(LmError::InvalidConfig("remote requests run at temperature 0".into()));
        }
        if self.max_in_flight == 0 {
            return Err(LmError::InvalidConfig("max_in_flight must be at least 1".into()));
        }
        Ok(())
    }
}

/// Called with every prompt handed to [`LmGateway::complete`], before the
/// budget check.
pub type PromptObserver = Box<dyn Fn(&PromptRequest) + Send + Sync>;

pub struct LmGateway {
    config: LmConfig,
    replay: Option<ReplayStore>,
    remote: Option<RemoteClient>,
    remote_calls: AtomicUsize,
    observer: Option<PromptObserver>,
}

impl std::fmt::Debug for LmGateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LmGateway")
            .field("backend", &self.config.backend_kind)
            .field("model", &self.config.model_name)
            .finish()
    }
}

impl LmGateway {
    /// Loads replay fixtures from `config.replay_path` for the replay backend.
    pub fn new(config: LmConfig) -> Result<Self, LmError> {
        config.validate()?;
        let replay = match (config.backend_kind, &config.replay_path) {
            (BackendKind::Replay, Some(path)) => Some(ReplayStore::load(path)?),
            (BackendKind::Replay, None) => Some(ReplayStore::new()),
            _ => None,
        };
        let remote = (config.backend_kind == BackendKind::Remote).then(|| RemoteClient::new(&config));
        Ok(Self { config, replay, remote, remote_calls: AtomicUsize::new(0), observer: None })
    }

    pub fn heuristic() -> Self {
        Self::new(LmConfig::heuristic()).expect("default config is valid")
    }

    /// Replay backend over an in-memory store.
    pub fn with_replay(store: ReplayStore) -> Self {
        let config = LmConfig { backend_kind: BackendKind::Replay, ..LmConfig::default() };
        Self { config, replay: Some(store), remote: None, remote_calls: AtomicUsize::new(0), observer: None }
    }

    /// Installs a prompt observer, replacing any previous one.
    pub fn with_observer(mut self, observer: impl Fn(&PromptRequest) + Send + Sync + 'static) -> Self {
        self.observer = Some(Box::new(observer));
        self
    }

    pub fn config(&self) -> &LmConfig {
        &self.config
    }

    pub fn backend(&self) -> BackendKind {
        self.config.backend_kind
    }

    pub fn replay_store(&self) -> Option<&ReplayStore> {
        self.replay.as_ref()
    }

    /// Number of remote requests issued so far, retries included.
    pub fn remote_calls(&self) -> usize {
        self.remote_calls.load(Ordering::SeqCst)
    }

    /// Concurrency for fan-out over units or cells.
    pub fn fan_out_width(&self) -> usize {
        match self.config.backend_kind {
            BackendKind::Remote => self.config.max_in_flight,
            _ => 1,
        }
    }

    pub fn complete(&self, request: &PromptRequest) -> Result<String, LmError> {
        if let Some(observe) = &self.observer {
            observe(request);
        }
        let estimated = request.estimated_tokens() + request.reserved_response_tokens;
        if estimated > self.config.token_budget {
            return Err(LmError::BudgetExceeded { estimated, budget: self.config.token_budget });
        }
        match self.config.backend_kind {
            BackendKind::Heuristic => Err(LmError::HeuristicBackend),
            BackendKind::Replay => {
                let hash = request.prompt_hash();
                self.replay
                    .as_ref()
                    .and_then(|store| store.get(&hash))
                    .ok_or(LmError::ReplayMiss { hash })
            }
            BackendKind::Remote => {
                let client = self.remote.as_ref().ok_or(LmError::HeuristicBackend)?;
                client.complete(request, &self.config, &self.remote_calls)
            }
        }
    }

    /// Runs one model-backed operation.
    ///
    /// * heuristic backend: `heuristic()` only, no prompt is built;
    /// * otherwise the prompt from `build` is completed and `parse`d;
    /// * a replay miss while recording stores `render(heuristic())` under the
    ///   prompt hash and returns it parsed back;
    /// * with `fallback_to_heuristic`, backend failures fall back too.
    pub fn semantic<T>(
        &self,
        label: &str,
        build: impl FnOnce(&LmConfig) -> Result<PromptRequest, LmError>,
        parse: impl Fn(&str) -> Result<T, String>,
        heuristic: impl FnOnce() -> T,
        render: impl Fn(&T) -> String,
    ) -> Result<T, SemanticError> {
        if self.config.backend_kind == BackendKind::Heuristic {
            return Ok(heuristic());
        }
        let request = match build(&self.config) {
            Ok(request) => request,
            Err(e) if self.config.fallback_to_heuristic => {
                tracing::warn!(label, error = %e, "prompt does not fit, using heuristic");
                return Ok(heuristic());
            }
            Err(e) => return Err(SemanticError::BackendFailure(e)),
        };
        match self.complete(&request) {
            Ok(text) => parse(&text).map_err(SemanticError::UnparseableResponse),
            Err(LmError::ReplayMiss { hash })
                if self.replay.as_ref().is_some_and(ReplayStore::is_recording) =>
            {
                let response = render(&heuristic());
                let value = parse(&response).map_err(SemanticError::UnparseableResponse)?;
                if let Some(store) = &self.replay {
                    store.insert(ReplayRecord { hash, label: label.to_string(), response });
                }
                Ok(value)
            }
            Err(e) if self.config.fallback_to_heuristic => {
                tracing::warn!(label, error = %e, "model path failed, using heuristic");
                Ok(heuristic())
            }
            Err(e) => Err(SemanticError::BackendFailure(e)),
        }
    }
}

/// Maps `f` over `items` with at most `width` concurrent calls, preserving
/// input order in the output.
pub fn fan_out<T, R, F>(items: &[T], width: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    if width <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..width.min(items.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_iter().map(|r| r.expect("every slot filled")).collect()
}
