//! Chat-completion client for the common `/chat/completions` wire format.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Backend, BackendError, GenerationRequest, Variability};

pub const API_KEY_ENV: &str = "EIPE_LLM_API_KEY";

#[derive(Debug, Clone)]
pub struct HttpBackend {
    url: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Debug, Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Debug, Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChatMessage {
    pub role: &'static str,
    pub content: String,
}

/// JSON body for one request.
pub fn request_body(req: &GenerationRequest) -> serde_json::Value {
    let temperature = match req.variability {
        Variability::Deterministic => 0.0,
        Variability::Sampled => 1.0,
    };
    json!({
        "model": req.model,
        "messages": [
            ChatMessage { role: "system", content: req.system_prompt.clone() },
            ChatMessage { role: "user", content: req.full_prompt.clone() },
        ],
        "n": req.n_completions,
        "temperature": temperature,
    })
}

impl HttpBackend {
    /// Client for `url`, reading the bearer token from `EIPE_LLM_API_KEY`.
    pub fn from_env(url: impl Into<String>) -> Self {
        Self::new(url, std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()))
    }

    pub fn new(url: impl Into<String>, api_key: Option<String>) -> Self {
        Self {
            url: url.into(),
            api_key,
            client: reqwest::blocking::Client::new(),
        }
    }
}

impl Backend for HttpBackend {
    fn name(&self) -> &str {
        "http"
    }

    fn complete(&self, req: &GenerationRequest) -> Result<Vec<String>, BackendError> {
        let mut call = self
            .client
            .post(&self.url)
            .timeout(req.timeout)
            .json(&request_body(req));
        if let Some(key) = &self.api_key {
            call = call.bearer_auth(key);
        }
        let resp = call.send().map_err(|e| {
            if e.is_timeout() {
                BackendError::Timeout
            } else {
                BackendError::Transport(e.to_string())
            }
        })?;
        let status = resp.status();
        if status == reqwest::StatusCode::UNAUTHORIZED || status == reqwest::StatusCode::FORBIDDEN {
            return Err(BackendError::Auth(format!("backend answered {status}")));
        }
        if status == reqwest::StatusCode::TOO_MANY_REQUESTS {
            return Err(BackendError::RateLimited);
        }
        if status.is_server_error() {
            return Err(BackendError::Transport(format!("backend answered {status}")));
        }
        if !status.is_success() {
            return Err(BackendError::Protocol(format!("backend answered {status}")));
        }
        let body: ChatResponse = resp.json().map_err(|e| {
            if e.is_timeout() {
                BackendError::Timeout
            } else {
                BackendError::Protocol(format!("malformed response: {e}"))
            }
        })?;
        Ok(body
            .choices
            .into_iter()
            .map(|c| c.message.content.unwrap_or_default())
            .collect())
    }
}
