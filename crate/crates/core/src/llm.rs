//! Minimal chat-completions client used by the remote planner and the
//! remote paraphraser.
//!
//! Request body (POST to the configured endpoint):
//!
//! ```json
//! {"model": "<name>", "temperature": 0,
//!  "messages": [{"role": "system", "content": "..."},
//!               {"role": "user", "content": "..."}]}
//! ```
//!
//! The reply text is read from `choices[0].message.content`. A bearer
//! token is sent when the environment variable named by `token_env` is
//! set.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("remote backend unavailable: {0}")]
    Unavailable(String),
    #[error("remote backend timed out")]
    Timeout,
    #[error("malformed remote reply: {0}")]
    BadReply(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: "system".into(), content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: "user".into(), content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: "assistant".into(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: f64,
    pub messages: Vec<ChatMessage>,
}

/// Anything that can answer a chat request with reply text.
pub trait ChatTransport: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, TransportError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteBackendConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub token_env: String,
    pub timeout_ms: u64,
    /// System prompt; `{schema}` is replaced by the DSL schema JSON.
    pub system_prompt: String,
}

impl Default for RemoteBackendConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            model: "default".into(),
            token_env: "CINEMOTION_API_TOKEN".into(),
            timeout_ms: 20_000,
            system_prompt: "You translate shot descriptions into a motion DSL. Reply with one program \
                            and nothing else. The DSL schema is:\n{schema}"
                .into(),
        }
    }
}

impl RemoteBackendConfig {
    pub fn system_message(&self) -> String {
        self.system_prompt.replace("{schema}", crate::dsl::schema_json())
    }

    pub fn request(&self, messages: Vec<ChatMessage>) -> ChatRequest {
        ChatRequest { model: self.model.clone(), temperature: 0.0, messages }
    }
}

#[derive(Deserialize)]
struct Reply {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChatMessage,
}

/// Extracts the reply text from a chat-completions response body.
pub fn parse_reply(body: &str) -> Result<String, TransportError> {
    let reply: Reply = serde_json::from_str(body).map_err(|e| TransportError::BadReply(e.to_string()))?;
    reply
        .choices
        .into_iter()
        .next()
        .map(|c| c.message.content)
        .ok_or_else(|| TransportError::BadReply("no choices".into()))
}

/// Blocking HTTP transport. Do not call from inside an async runtime
/// thread; use a blocking task.
pub struct HttpTransport {
    config: RemoteBackendConfig,
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(config: RemoteBackendConfig) -> Result<Self, TransportError> {
        if config.timeout_ms == 0 {
            return Err(TransportError::Unavailable("timeout must be positive".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| TransportError::Unavailable(e.to_string()))?;
        Ok(Self { config, client })
    }

    pub fn config(&self) -> &RemoteBackendConfig {
        &self.config
    }
}

impl ChatTransport for HttpTransport {
    fn complete(&self, request: &ChatRequest) -> Result<String, TransportError> {
        let mut call = self.client.post(&self.config.endpoint).json(request);
        if let Ok(token) = std::env::var(&self.config.token_env) {
            call = call.bearer_auth(token);
        }
        let response = call.send().map_err(|e| {
            if e.is_timeout() {
                TransportError::Timeout
            } else {
                TransportError::Unavailable(e.to_string())
            }
        })?;
        let status = response.status();
        let body = response.text().map_err(|e| TransportError::BadReply(e.to_string()))?;
        if !status.is_success() {
            return Err(TransportError::Unavailable(format!("HTTP {status}")));
        }
        parse_reply(&body)
    }
}

/// Transport that always fails; stands in for an unreachable backend.
#[derive(Debug, Clone, Default)]
pub struct OfflineTransport;

impl ChatTransport for OfflineTransport {
    fn complete(&self, _: &ChatRequest) -> Result<String, TransportError> {
        Err(TransportError::Unavailable("offline".into()))
    }
}

/// Replays canned replies in order, then reports unavailability.
#[derive(Debug, Default)]
pub struct ScriptedTransport {
    replies: Mutex<VecDeque<Result<String, TransportError>>>,
    seen: Mutex<Vec<ChatRequest>>,
}

impl ScriptedTransport {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::with_results(replies.into_iter().map(|s| Ok(s.into())))
    }

    pub fn with_results(replies: impl IntoIterator<Item = Result<String, TransportError>>) -> Self {
        Self { replies: Mutex::new(replies.into_iter().collect()), seen: Mutex::default() }
    }

    /// Requests received so far.
    pub fn requests(&self) -> Vec<ChatRequest> {
        self.seen.lock().expect("poisoned").clone()
    }
}

impl ChatTransport for ScriptedTransport {
    fn complete(&self, request: &ChatRequest) -> Result<String, TransportError> {
        self.seen.lock().expect("poisoned").push(request.clone());
        self.replies
            .lock()
            .expect("poisoned")
            .pop_front()
            .unwrap_or_else(|| Err(TransportError::Unavailable("script exhausted".into())))
    }
}

impl<F> ChatTransport for F
where
    F: Fn(&ChatRequest) -> Result<String, TransportError> + Send + Sync,
{
    fn complete(&self, request: &ChatRequest) -> Result<String, TransportError> {
        self(request)
    }
}
