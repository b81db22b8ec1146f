//! Offline backend driven by a fixture of canned replies.
//!
//! ```toml
//! default = "I cannot help with that."
//!
//! [[rules]]
//! match = "reverses a string"
//! completions = ["```c\nvoid foo(char *s) { ... }\n```"]
//! ```
//!
//! The first rule whose `match` substring occurs in the user prompt wins.
//! In deterministic mode every completion is the rule's first entry; in
//! sampled mode completion `i` of a request is entry `i mod len`, so the
//! output depends only on the prompt and `n`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Backend, BackendError, GenerationRequest, Variability};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockRule {
    #[serde(rename = "match")]
    pub substring: String,
    pub completions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockFixture {
    pub default: String,
    #[serde(default)]
    pub rules: Vec<MockRule>,
}

impl MockFixture {
    pub fn parse(text: &str) -> Result<Self, String> {
        let f: MockFixture = toml::from_str(text).map_err(|e| e.to_string())?;
        if let Some(r) = f.rules.iter().find(|r| r.completions.is_empty()) {
            return Err(format!("mock rule `{}` has no completions", r.substring));
        }
        Ok(f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, String> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    fn variants_for(&self, prompt: &str) -> &[String] {
        self.rules
            .iter()
            .find(|r| prompt.contains(&r.substring))
            .map_or(std::slice::from_ref(&self.default), |r| &r.completions)
    }
}

#[derive(Debug, Clone)]
pub struct MockBackend {
    fixture: MockFixture,
}

impl MockBackend {
    pub fn new(fixture: MockFixture) -> Self {
        Self { fixture }
    }

    /// A mock that always answers with `reply`.
    pub fn constant(reply: impl Into<String>) -> Self {
        Self::new(MockFixture {
            default: reply.into(),
            rules: Vec::new(),
        })
    }
}

impl Backend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, req: &GenerationRequest) -> Result<Vec<String>, BackendError> {
        let variants = self.fixture.variants_for(&req.full_prompt);
        let n = req.n_completions as usize;
        Ok(match req.variability {
            Variability::Deterministic => vec![variants[0].clone(); n],
            Variability::Sampled => (0..n).map(|i| variants[i % variants.len()].clone()).collect(),
        })
    }
}
