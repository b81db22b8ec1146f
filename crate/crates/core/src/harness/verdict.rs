use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::text::truncate_bytes;

use super::sandbox::DIAGNOSTIC_BYTES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VerdictKind {
    Pass,
    TestFail,
    CompileError,
    RuntimeError,
    Timeout,
    ExtractionError,
}

impl VerdictKind {
    pub const ALL: [VerdictKind; 6] = [
        VerdictKind::Pass,
        VerdictKind::TestFail,
        VerdictKind::CompileError,
        VerdictKind::RuntimeError,
        VerdictKind::Timeout,
        VerdictKind::ExtractionError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::Pass => "Pass",
            VerdictKind::TestFail => "TestFail",
            VerdictKind::CompileError => "CompileError",
            VerdictKind::RuntimeError => "RuntimeError",
            VerdictKind::Timeout => "Timeout",
            VerdictKind::ExtractionError => "ExtractionError",
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VerdictKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VerdictKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown verdict kind `{s}`"))
    }
}

/// Outcome of one test case under differential judging.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case_index: usize,
    pub passed: bool,
    pub expected_observation: String,
    pub actual_observation: String,
}

impl CaseResult {
    pub fn new(case_index: usize, expected: String, actual: String) -> Self {
        Self {
            case_index,
            passed: expected == actual,
            expected_observation: expected,
            actual_observation: actual,
        }
    }
}

/// The judged outcome of one candidate.
///
/// Only the harness builds verdicts; the constructors keep `kind` and
/// `case_results` consistent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub case_results: Vec<CaseResult>,
    pub diagnostics: String,
    /// The candidate's output hit its ceiling and the run was cut short.
    #[serde(default)]
    pub output_truncated: bool,
}

impl Verdict {
    pub fn from_cases(case_results: Vec<CaseResult>) -> Self {
        let kind = if case_results.iter().all(|c| c.passed) {
            VerdictKind::Pass
        } else {
            VerdictKind::TestFail
        };
        Self {
            kind,
            case_results,
            diagnostics: String::new(),
            output_truncated: false,
        }
    }

    fn failure(kind: VerdictKind, diagnostics: &str) -> Self {
        Self {
            kind,
            case_results: Vec::new(),
            diagnostics: truncate_bytes(diagnostics, DIAGNOSTIC_BYTES),
            output_truncated: false,
        }
    }

    pub fn compile_error(diagnostics: &str) -> Self {
        Self::failure(VerdictKind::CompileError, diagnostics)
    }

    pub fn runtime_error(diagnostics: &str) -> Self {
        Self::failure(VerdictKind::RuntimeError, diagnostics)
    }

    pub fn output_limit(diagnostics: &str) -> Self {
        Self {
            output_truncated: true,
            ..Self::failure(VerdictKind::RuntimeError, diagnostics)
        }
    }

    pub fn timeout(diagnostics: &str) -> Self {
        Self::failure(VerdictKind::Timeout, diagnostics)
    }

    /// No code could be extracted from the generated reply.
    pub fn extraction_error() -> Self {
        Self::failure(
            VerdictKind::ExtractionError,
            "the generated reply did not contain any code",
        )
    }

    pub fn passed(&self) -> bool {
        self.kind == VerdictKind::Pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_follows_cases() {
        let v = Verdict::from_cases(vec![CaseResult::new(0, "a".into(), "a".into())]);
        assert_eq!(v.kind, VerdictKind::Pass);
        let v = Verdict::from_cases(vec![
            CaseResult::new(0, "a".into(), "a".into()),
            CaseResult::new(1, "b".into(), "c".into()),
        ]);
        assert_eq!(v.kind, VerdictKind::TestFail);
        assert!(!v.case_results[1].passed);
    }

    #[test]
    fn diagnostics_are_bounded() {
        let v = Verdict::compile_error(&"x".repeat(20_000));
        assert!(v.diagnostics.len() <= DIAGNOSTIC_BYTES + 16);
        assert!(v.case_results.is_empty());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in VerdictKind::ALL {
            assert_eq!(k.as_str().parse::<VerdictKind>(), Ok(k));
        }
    }
}
