//! Prompt assembly and code generation.
//!
//! A [`Gateway`] wraps a pluggable [`Backend`], caps the number of requests
//! in flight, retries a retryable failure once, and runs code extraction on
//! every reply.

mod extract;
mod http;
mod mock;
mod prompt;

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

use crate::sync::FifoSemaphore;

pub use extract::extract_code;
pub use http::{request_body, HttpBackend, API_KEY_ENV};
pub use mock::{MockBackend, MockFixture, MockRule};
pub use prompt::{assemble_prompt, system_instruction, AssembledPrompt, PromptError, SYSTEM_INSTRUCTION};

pub const DEFAULT_IN_FLIGHT: usize = 4;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variability {
    #[default]
    Deterministic,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationRequest {
    pub system_prompt: String,
    pub full_prompt: String,
    pub n_completions: u32,
    pub variability: Variability,
    pub timeout: Duration,
    pub model: String,
}

impl GenerationRequest {
    pub fn new(prompt: AssembledPrompt, model: impl Into<String>) -> Self {
        Self {
            system_prompt: prompt.system,
            full_prompt: prompt.user,
            n_completions: 1,
            variability: Variability::Deterministic,
            timeout: DEFAULT_TIMEOUT,
            model: model.into(),
        }
    }

    pub fn with_n(mut self, n: u32) -> Self {
        self.n_completions = n;
        self
    }

    pub fn with_variability(mut self, v: Variability) -> Self {
        self.variability = v;
        self
    }

    pub fn with_timeout(mut self, t: Duration) -> Self {
        self.timeout = t;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub raw_text: String,
    pub extracted_source: Option<String>,
    pub backend_metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("backend timed out")]
    Timeout,
    #[error("backend transport error: {0}")]
    Transport(String),
    #[error("backend rate limit reached")]
    RateLimited,
    #[error("backend rejected credentials: {0}")]
    Auth(String),
    #[error("unexpected backend response: {0}")]
    Protocol(String),
}

impl BackendError {
    pub fn retryable(&self) -> bool {
        matches!(
            self,
            BackendError::Timeout | BackendError::Transport(_) | BackendError::RateLimited
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GatewayError {
    #[error("invalid generation request: {0}")]
    InvalidRequest(String),
    #[error("{error} (after {attempts} attempt(s))")]
    Backend { error: BackendError, attempts: u32 },
}

/// Source of raw completions.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;

    /// Up to `req.n_completions` raw replies, in backend order.
    fn complete(&self, req: &GenerationRequest) -> Result<Vec<String>, BackendError>;
}

pub struct Gateway {
    backend: Arc<dyn Backend>,
    in_flight: FifoSemaphore,
    retries: u32,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway")
            .field("backend", &self.backend.name())
            .field("in_flight_cap", &self.in_flight.capacity())
            .finish()
    }
}

impl Gateway {
    pub fn new(backend: Arc<dyn Backend>) -> Self {
        Self::with_cap(backend, DEFAULT_IN_FLIGHT)
    }

    pub fn with_cap(backend: Arc<dyn Backend>, cap: usize) -> Self {
        Self {
            backend,
            in_flight: FifoSemaphore::new(cap),
            retries: 1,
        }
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    fn call_once(&self, req: &GenerationRequest) -> Result<(Vec<String>, u32), GatewayError> {
        let mut attempts = 0;
        loop {
            attempts += 1;
            let result = {
                let _permit = self.in_flight.acquire();
                self.backend.complete(req)
            };
            match result {
                Ok(texts) => return Ok((texts, attempts)),
                Err(e) if e.retryable() && attempts <= self.retries => {
                    log::warn!("{} backend: {e}; retrying", self.backend.name());
                }
                Err(error) => return Err(GatewayError::Backend { error, attempts }),
            }
        }
    }

    /// Exactly `req.n_completions` completions, extraction attempted on each.
    pub fn generate(&self, req: &GenerationRequest) -> Result<Vec<Completion>, GatewayError> {
        if req.n_completions == 0 {
            return Err(GatewayError::InvalidRequest("n_completions must be at least 1".into()));
        }
        if req.timeout.is_zero() {
            return Err(GatewayError::InvalidRequest("timeout must be positive".into()));
        }
        let want = req.n_completions as usize;
        let mut texts = Vec::with_capacity(want);
        let mut calls = 0;
        let mut total_attempts = 0;
        // backends that ignore the sample count get asked again for the rest
        while texts.len() < want {
            calls += 1;
            let mut partial = req.clone();
            partial.n_completions = (want - texts.len()) as u32;
            let (got, attempts) = self.call_once(&partial)?;
            total_attempts += attempts;
            if got.is_empty() {
                return Err(GatewayError::Backend {
                    error: BackendError::Protocol("backend returned no choices".into()),
                    attempts: total_attempts,
                });
            }
            texts.extend(got);
            if calls > want {
                break;
            }
        }
        texts.truncate(want);
        Ok(texts
            .into_iter()
            .enumerate()
            .map(|(i, raw_text)| {
                let mut meta = BTreeMap::new();
                meta.insert("backend".to_string(), self.backend.name().to_string());
                meta.insert("model".to_string(), req.model.clone());
                meta.insert("index".to_string(), i.to_string());
                meta.insert("attempts".to_string(), total_attempts.to_string());
                Completion {
                    extracted_source: extract_code(&raw_text),
                    raw_text,
                    backend_metadata: meta,
                }
            })
            .collect())
    }
}
