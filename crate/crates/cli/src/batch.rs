//! Replays a corpus of stored explanations through the full pipeline.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use eipe_core::engine::{write_records, LogFilter};
use eipe_core::{GradingEngine, SubmitError, VerdictKind};

use crate::config::{BackendConfig, LimitOverrides};
use crate::setup::{build_gateway, build_harness, load_validated_bank};

/// One input row: `user_id,problem_id,prompt_text`.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct PromptRow {
    pub user_id: String,
    pub problem_id: String,
    pub prompt_text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BatchSummary {
    pub rows: usize,
    pub judged: usize,
    pub by_verdict: BTreeMap<VerdictKind, usize>,
    /// Rows refused before judging (length limit, exhausted attempts,
    /// empty text), keyed by reason.
    pub rejected: BTreeMap<String, usize>,
}

pub fn read_prompts(path: &Path) -> Result<Vec<PromptRow>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| r.with_context(|| format!("{} row {}", path.display(), i + 2)))
        .collect()
}

fn rejection_reason(e: &SubmitError) -> Option<&'static str> {
    match e {
        SubmitError::CharLimitExceeded { .. } => Some("char_limit"),
        SubmitError::AttemptsExhausted { .. } => Some("attempts_exhausted"),
        SubmitError::EmptyPrompt(_) => Some("empty_prompt"),
        SubmitError::UnknownUser => Some("unknown_user"),
        _ => None,
    }
}

/// Grades every row in order with a fresh in-memory engine and writes the
/// resulting attempts in log format to `output`. Infrastructure failures
/// abort the run.
pub fn grade_batch(
    bank: &Path,
    prompts: &Path,
    output: &Path,
    backend: &BackendConfig,
    limits: &LimitOverrides,
) -> Result<BatchSummary> {
    let harness = build_harness(limits)?;
    let bank = load_validated_bank(bank, &harness)?;
    let rows = read_prompts(prompts)?;
    let unknown: Vec<&str> = rows
        .iter()
        .filter(|r| bank.get(&r.problem_id).is_none())
        .map(|r| r.problem_id.as_str())
        .collect();
    if !unknown.is_empty() {
        bail!("prompts refer to unknown problems: {}", unknown.join(", "));
    }
    let (gateway, engine_cfg) = build_gateway(backend)?;
    let engine = GradingEngine::in_memory(bank, gateway, Arc::clone(&harness), engine_cfg);
    let mut summary = BatchSummary {
        rows: rows.len(),
        ..Default::default()
    };
    for (i, row) in rows.iter().enumerate() {
        match engine.submit_attempt(&row.user_id, &row.problem_id, &row.prompt_text) {
            Ok(out) => {
                summary.judged += 1;
                *summary.by_verdict.entry(out.attempt.verdict_kind).or_default() += 1;
            }
            Err(e) => match rejection_reason(&e) {
                Some(reason) => *summary.rejected.entry(reason.to_string()).or_default() += 1,
                None => return Err(e).with_context(|| format!("row {}", i + 2)),
            },
        }
    }
    let file = File::create(output).with_context(|| format!("creating {}", output.display()))?;
    write_records(BufWriter::new(file), &engine.export_log(&LogFilter::default()))?;
    Ok(summary)
}

impl std::fmt::Display for BatchSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "rows: {}", self.rows)?;
        writeln!(f, "judged: {}", self.judged)?;
        for (k, n) in &self.by_verdict {
            writeln!(f, "  {k}: {n}")?;
        }
        let rejected: usize = self.rejected.values().sum();
        writeln!(f, "rejected: {rejected}")?;
        for (k, n) in &self.rejected {
            writeln!(f, "  {k}: {n}")?;
        }
        Ok(())
    }
}
