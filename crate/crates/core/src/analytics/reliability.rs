use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::bank::Problem;
use crate::gateway::{PromptError, Gateway, GatewayError, GenerationRequest};
use crate::harness::{Harness, HarnessError, Verdict, VerdictKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReliabilityReport {
    pub problem_id: String,
    pub prompt_text: String,
    pub n: u32,
    pub pass_count: u32,
    pub pass_rate: f64,
    pub histogram: BTreeMap<VerdictKind, u32>,
}

#[derive(Debug, Error)]
pub enum ReliabilityError {
    #[error("n must be at least 1")]
    ZeroSamples,
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

/// Judges `n` completions of one prompt. `request` carries the assembled
/// prompt and sampling settings; its sample count is overridden by `n`.
pub fn prompt_reliability(
    problem: &Problem,
    prompt_text: &str,
    n: u32,
    gateway: &Gateway,
    harness: &Harness,
    request: &GenerationRequest,
) -> Result<ReliabilityReport, ReliabilityError> {
    if n == 0 {
        return Err(ReliabilityError::ZeroSamples);
    }
    let completions = gateway.generate(&request.clone().with_n(n))?;
    let mut histogram = BTreeMap::new();
    let mut pass_count = 0;
    for c in completions {
        let verdict = match &c.extracted_source {
            None => Verdict::extraction_error(),
            Some(code) => harness.judge_problem(
                &problem.language_tag,
                &problem.reference_source,
                code,
                &problem.signature,
                &problem.test_suite,
            )?,
        };
        if verdict.passed() {
            pass_count += 1;
        }
        *histogram.entry(verdict.kind).or_insert(0) += 1;
    }
    Ok(ReliabilityReport {
        problem_id: problem.id.clone(),
        prompt_text: prompt_text.to_string(),
        n,
        pass_count,
        pass_rate: pass_count as f64 / n as f64,
        histogram,
    })
}
