use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::harness::{CaseResult, VerdictKind};

/// One judged submission, exactly as persisted in the attempt log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub attempt_id: String,
    pub user_id: String,
    pub problem_id: String,
    /// 1-based index among the user's counted attempts on this problem.
    /// Exploratory attempts carry the index of the last counted one.
    pub attempt_index: u32,
    /// Submitted after the problem was already solved; never counted.
    pub exploratory: bool,
    pub prompt_text: String,
    /// Unicode scalar values in `prompt_text`.
    pub prompt_length: usize,
    pub raw_completion: String,
    pub extracted_source: Option<String>,
    pub verdict_kind: VerdictKind,
    pub case_results: Vec<CaseResult>,
    pub submitted_at: DateTime<Utc>,
    pub latency_ms: u64,
}

impl Attempt {
    pub fn passed(&self) -> bool {
        self.verdict_kind == VerdictKind::Pass
    }

    pub fn counted(&self) -> bool {
        !self.exploratory
    }

    pub fn latency(&self) -> Duration {
        Duration::from_millis(self.latency_ms)
    }
}

/// What a submitter gets back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttemptOutcome {
    pub attempt: Attempt,
    pub remaining: u32,
    /// This or an earlier attempt passed.
    pub solved: bool,
    /// Compiler or runtime diagnostics for the verdict (not persisted).
    pub diagnostics: String,
}
