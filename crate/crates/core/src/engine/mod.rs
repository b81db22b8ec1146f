//! The attempt lifecycle.
//!
//! `submit_attempt` checks limits, assembles the prompt, generates one
//! completion, judges it, appends the attempt to the log and updates the
//! in-memory index. Only judged submissions consume an attempt: a rejected
//! prompt or an infrastructure failure leaves the count untouched, and
//! submissions after a problem is solved are logged as exploratory.

mod attempt;
mod log;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use parking_lot::{Mutex, RwLock};
use thiserror::Error;

use crate::analytics::{prompt_reliability, ReliabilityError, ReliabilityReport};
use crate::bank::{Problem, ProblemSet};
use crate::gateway::{
    assemble_prompt, Gateway, GatewayError, GenerationRequest, PromptError, Variability,
    DEFAULT_TIMEOUT,
};
use crate::harness::{Harness, HarnessError, Verdict};
use crate::text::scalar_count;

pub use attempt::{Attempt, AttemptOutcome};
pub use log::{read_log, read_records, record_line, write_records, AttemptLog, LogError};

#[derive(Debug, Error)]
pub enum SubmitError {
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("unknown user")]
    UnknownUser,
    #[error("all {max} attempts on this problem have been used")]
    AttemptsExhausted { max: u32 },
    #[error("explanation is {actual} characters long; the limit is {limit}")]
    CharLimitExceeded { limit: u32, actual: usize },
    #[error(transparent)]
    EmptyPrompt(#[from] PromptError),
    #[error("code generation failed: {0}")]
    Backend(#[from] GatewayError),
    #[error("grading infrastructure failed: {0}")]
    Harness(#[from] HarnessError),
    #[error("could not record the attempt: {0}")]
    Log(#[from] LogError),
}

impl SubmitError {
    /// Failures of the service rather than of the submission.
    pub fn is_infrastructure(&self) -> bool {
        matches!(
            self,
            SubmitError::Backend(_) | SubmitError::Harness(_) | SubmitError::Log(_)
        )
    }
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub model: String,
    pub generation_timeout: Duration,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            model: "default".to_string(),
            generation_timeout: DEFAULT_TIMEOUT,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct KeyState {
    counted: u32,
    solved: bool,
}

type Key = (String, String);

#[derive(Debug, Default)]
struct State {
    attempts: Vec<Attempt>,
    per_key: HashMap<Key, KeyState>,
    ids: HashSet<String>,
    next_seq: u64,
}

impl State {
    fn replay(records: Vec<Attempt>) -> Self {
        let mut st = State::default();
        for a in records {
            st.record(a);
        }
        st
    }

    fn record(&mut self, a: Attempt) {
        let ks = self
            .per_key
            .entry((a.user_id.clone(), a.problem_id.clone()))
            .or_default();
        if a.counted() {
            ks.counted += 1;
        }
        ks.solved |= a.passed();
        self.ids.insert(a.attempt_id.clone());
        self.next_seq += 1;
        self.attempts.push(a);
    }

    fn fresh_id(&self) -> String {
        let mut seq = self.next_seq + 1;
        loop {
            let id = format!("att-{seq:08}");
            if !self.ids.contains(&id) {
                return id;
            }
            seq += 1;
        }
    }
}

/// Bounds for [`GradingEngine::export_log`]. Unset fields match everything.
#[derive(Debug, Clone, Default)]
pub struct LogFilter {
    pub problem_id: Option<String>,
    pub user_id: Option<String>,
    pub since: Option<DateTime<Utc>>,
    pub until: Option<DateTime<Utc>>,
}

impl LogFilter {
    pub fn matches(&self, a: &Attempt) -> bool {
        self.problem_id.as_ref().is_none_or(|p| *p == a.problem_id)
            && self.user_id.as_ref().is_none_or(|u| *u == a.user_id)
            && self.since.is_none_or(|t| a.submitted_at >= t)
            && self.until.is_none_or(|t| a.submitted_at <= t)
    }
}

pub struct GradingEngine {
    bank: RwLock<Arc<ProblemSet>>,
    gateway: Arc<Gateway>,
    harness: Arc<Harness>,
    log: Option<AttemptLog>,
    config: EngineConfig,
    state: Mutex<State>,
    key_locks: Mutex<HashMap<Key, Arc<Mutex<()>>>>,
}

impl std::fmt::Debug for GradingEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GradingEngine")
            .field("problems", &self.bank.read().len())
            .field("attempts", &self.state.lock().attempts.len())
            .field("log", &self.log.as_ref().map(AttemptLog::path))
            .finish()
    }
}

impl GradingEngine {
    /// An engine whose history starts with `records` and is not persisted.
    pub fn from_records(
        bank: ProblemSet,
        gateway: Arc<Gateway>,
        harness: Arc<Harness>,
        config: EngineConfig,
        records: Vec<Attempt>,
    ) -> Self {
        Self {
            bank: RwLock::new(Arc::new(bank)),
            gateway,
            harness,
            log: None,
            config,
            state: Mutex::new(State::replay(records)),
            key_locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn in_memory(
        bank: ProblemSet,
        gateway: Arc<Gateway>,
        harness: Arc<Harness>,
        config: EngineConfig,
    ) -> Self {
        Self::from_records(bank, gateway, harness, config, Vec::new())
    }

    /// An engine backed by the log at `path`; existing records are replayed.
    pub fn open(
        bank: ProblemSet,
        gateway: Arc<Gateway>,
        harness: Arc<Harness>,
        config: EngineConfig,
        path: impl AsRef<Path>,
    ) -> Result<Self, LogError> {
        let (log, records) = AttemptLog::open(path)?;
        let mut engine = Self::from_records(bank, gateway, harness, config, records);
        engine.log = Some(log);
        Ok(engine)
    }

    pub fn bank(&self) -> Arc<ProblemSet> {
        self.bank.read().clone()
    }

    /// Swaps in a new problem set; in-flight submissions keep the old one.
    pub fn reload_bank(&self, bank: ProblemSet) {
        *self.bank.write() = Arc::new(bank);
    }

    pub fn gateway(&self) -> &Arc<Gateway> {
        &self.gateway
    }

    pub fn harness(&self) -> &Arc<Harness> {
        &self.harness
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn problem(&self, id: &str) -> Result<Arc<Problem>, SubmitError> {
        self.bank
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| SubmitError::UnknownProblem(id.to_string()))
    }

    fn key_lock(&self, key: &Key) -> Arc<Mutex<()>> {
        self.key_locks.lock().entry(key.clone()).or_default().clone()
    }

    fn key_state(&self, key: &Key) -> KeyState {
        self.state.lock().per_key.get(key).copied().unwrap_or_default()
    }

    pub fn submit_attempt(
        &self,
        user_id: &str,
        problem_id: &str,
        prompt_text: &str,
    ) -> Result<AttemptOutcome, SubmitError> {
        if user_id.trim().is_empty() {
            return Err(SubmitError::UnknownUser);
        }
        let problem = self.problem(problem_id)?;
        let key = (user_id.to_string(), problem_id.to_string());
        let lock = self.key_lock(&key);
        let _serial = lock.lock();

        let before = self.key_state(&key);
        let exploratory = before.solved;
        if !exploratory && before.counted >= problem.max_attempts {
            return Err(SubmitError::AttemptsExhausted {
                max: problem.max_attempts,
            });
        }
        let prompt = assemble_prompt(&problem, prompt_text)?;
        let length = scalar_count(prompt_text);
        if let Some(limit) = problem.char_limit {
            if length > limit as usize {
                return Err(SubmitError::CharLimitExceeded {
                    limit,
                    actual: length,
                });
            }
        }

        let started = Instant::now();
        let request = GenerationRequest::new(prompt, self.config.model.clone())
            .with_timeout(self.config.generation_timeout);
        let completion = self
            .gateway
            .generate(&request)?
            .into_iter()
            .next()
            .expect("generate returns exactly one completion");
        let verdict = match &completion.extracted_source {
            None => Verdict::extraction_error(),
            Some(code) => self.harness.judge_problem(
                &problem.language_tag,
                &problem.reference_source,
                code,
                &problem.signature,
                &problem.test_suite,
            )?,
        };

        let mut st = self.state.lock();
        let attempt = Attempt {
            attempt_id: st.fresh_id(),
            user_id: user_id.to_string(),
            problem_id: problem_id.to_string(),
            attempt_index: if exploratory {
                before.counted
            } else {
                before.counted + 1
            },
            exploratory,
            prompt_text: prompt_text.to_string(),
            prompt_length: length,
            raw_completion: completion.raw_text,
            extracted_source: completion.extracted_source,
            verdict_kind: verdict.kind,
            case_results: verdict.case_results,
            submitted_at: Utc::now(),
            latency_ms: started.elapsed().as_millis() as u64,
        };
        if let Some(log) = &self.log {
            log.append(&attempt)?;
        }
        st.record(attempt.clone());
        let after = st.per_key[&key];
        drop(st);
        Ok(AttemptOutcome {
            attempt,
            remaining: problem.max_attempts.saturating_sub(after.counted),
            solved: after.solved,
            diagnostics: verdict.diagnostics,
        })
    }

    pub fn remaining_attempts(&self, user_id: &str, problem_id: &str) -> Result<u32, SubmitError> {
        let problem = self.problem(problem_id)?;
        let ks = self.key_state(&(user_id.to_string(), problem_id.to_string()));
        Ok(problem.max_attempts.saturating_sub(ks.counted))
    }

    pub fn is_solved(&self, user_id: &str, problem_id: &str) -> bool {
        self.key_state(&(user_id.to_string(), problem_id.to_string()))
            .solved
    }

    /// Sum of the weights of the problems `user_id` has solved. Failed
    /// attempts never subtract.
    pub fn score(&self, user_id: &str) -> f64 {
        let bank = self.bank();
        let st = self.state.lock();
        let mut solved: Vec<&str> = st
            .per_key
            .iter()
            .filter(|((u, _), ks)| u == user_id && ks.solved)
            .map(|((_, p), _)| p.as_str())
            .collect();
        solved.sort_unstable();
        solved
            .into_iter()
            .filter_map(|p| bank.get(p))
            .map(|p| p.weight)
            .sum()
    }

    /// Every user that has at least one attempt.
    pub fn users(&self) -> Vec<String> {
        let st = self.state.lock();
        let mut users: Vec<String> = st.per_key.keys().map(|(u, _)| u.clone()).collect();
        users.sort();
        users.dedup();
        users
    }

    /// Matching attempts in submission-time order (ties keep log order).
    pub fn export_log(&self, filter: &LogFilter) -> Vec<Attempt> {
        let mut out: Vec<Attempt> = self
            .state
            .lock()
            .attempts
            .iter()
            .filter(|a| filter.matches(a))
            .cloned()
            .collect();
        out.sort_by_key(|a| a.submitted_at);
        out
    }

    pub fn history(&self, user_id: &str, problem_id: Option<&str>) -> Vec<Attempt> {
        self.export_log(&LogFilter {
            user_id: Some(user_id.to_string()),
            problem_id: problem_id.map(str::to_string),
            ..Default::default()
        })
    }

    /// Per (user, problem): remaining attempts and solved flag.
    pub fn standings(&self) -> BTreeMap<(String, String), (u32, bool)> {
        let bank = self.bank();
        let st = self.state.lock();
        st.per_key
            .iter()
            .map(|(k, ks)| {
                let max = bank.get(&k.1).map_or(0, |p| p.max_attempts);
                (k.clone(), (max.saturating_sub(ks.counted), ks.solved))
            })
            .collect()
    }

    /// Generates `n` sampled completions for a fixed prompt and judges each.
    /// Attempt counts are not touched.
    pub fn prompt_reliability(
        &self,
        problem_id: &str,
        prompt_text: &str,
        n: u32,
    ) -> Result<ReliabilityReport, ReliabilityError> {
        let problem = self
            .problem(problem_id)
            .map_err(|_| ReliabilityError::UnknownProblem(problem_id.to_string()))?;
        let request = GenerationRequest::new(assemble_prompt(&problem, prompt_text)?, self.config.model.clone())
            .with_timeout(self.config.generation_timeout)
            .with_variability(Variability::Sampled);
        prompt_reliability(&problem, prompt_text, n, &self.gateway, &self.harness, &request)
    }
}
