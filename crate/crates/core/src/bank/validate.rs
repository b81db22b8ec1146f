//! Confirms a problem's reference is a usable oracle: it compiles, every
//! case runs within limits, and it judges equivalent to itself.

use std::fmt;

use crate::harness::{synthesize_driver, DriverError, Harness, HarnessError, RunStatus, SourceRun};

use super::types::Problem;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    Structure(String),
    UnsupportedLanguage(String),
    TypeMismatch { case_index: usize, message: String },
    CompileFailure { diagnostics: String },
    ReferenceTimeout { case_index: usize },
    ReferenceRuntime { case_index: usize, detail: String },
    SelfJudge { detail: String },
    Infrastructure(String),
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::Structure(m) => write!(f, "invalid definition: {m}"),
            ValidationIssue::UnsupportedLanguage(l) => write!(f, "no toolchain for `{l}`"),
            ValidationIssue::TypeMismatch { case_index, message } => {
                write!(f, "test case {case_index}: {message}")
            }
            ValidationIssue::CompileFailure { diagnostics } => {
                write!(f, "reference does not compile:\n{diagnostics}")
            }
            ValidationIssue::ReferenceTimeout { case_index } => {
                write!(f, "reference timed out in test case {case_index}")
            }
            ValidationIssue::ReferenceRuntime { case_index, detail } => {
                write!(f, "reference failed in test case {case_index}: {detail}")
            }
            ValidationIssue::SelfJudge { detail } => {
                write!(f, "reference does not judge equivalent to itself: {detail}")
            }
            ValidationIssue::Infrastructure(m) => write!(f, "harness failure: {m}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub problem_id: String,
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "{}: ok", self.problem_id);
        }
        for issue in &self.issues {
            writeln!(f, "{}: {issue}", self.problem_id)?;
        }
        Ok(())
    }
}

pub fn validate_problem(p: &Problem, harness: &Harness) -> ValidationReport {
    let mut report = ValidationReport {
        problem_id: p.id.clone(),
        issues: Vec::new(),
    };
    let issues = &mut report.issues;
    if !harness.supports(&p.language_tag) {
        issues.push(ValidationIssue::UnsupportedLanguage(p.language_tag.clone()));
        return report;
    }
    if let Err(e) = p.signature.check() {
        issues.push(ValidationIssue::Structure(e));
        return report;
    }
    for (i, case) in p.test_suite.iter().enumerate() {
        if let Err(message) = case.conforms(&p.signature) {
            issues.push(ValidationIssue::TypeMismatch {
                case_index: i,
                message,
            });
        }
    }
    if !issues.is_empty() {
        return report;
    }
    let driver = match synthesize_driver(&p.signature, &p.test_suite) {
        Ok(d) => d,
        Err(DriverError::EmptySuite) => {
            issues.push(ValidationIssue::Structure("test suite is empty".into()));
            return report;
        }
        Err(e) => {
            issues.push(ValidationIssue::Structure(e.to_string()));
            return report;
        }
    };
    let limits = harness.limits();
    match harness.run_source(&p.reference_source, &driver, limits) {
        Err(e) => issues.push(ValidationIssue::Infrastructure(e.to_string())),
        Ok(SourceRun::CompileFailed(f)) => issues.push(ValidationIssue::CompileFailure {
            diagnostics: f.diagnostics,
        }),
        Ok(SourceRun::Ran(record)) => {
            let case_index = record.first_missing_case().unwrap_or(record.observations.len());
            match record.status {
                RunStatus::Exited(0) if record.first_missing_case().is_none() => {}
                RunStatus::TimedOut => issues.push(ValidationIssue::ReferenceTimeout { case_index }),
                status => issues.push(ValidationIssue::ReferenceRuntime {
                    case_index,
                    detail: format!("{status:?} {}", record.stderr).trim().to_string(),
                }),
            }
        }
    }
    if !issues.is_empty() {
        return report;
    }
    match harness.judge(
        &p.reference_source,
        &p.reference_source,
        &p.signature,
        &p.test_suite,
        limits,
    ) {
        Ok(v) if v.passed() => {}
        Ok(v) => issues.push(ValidationIssue::SelfJudge {
            detail: format!("{} {}", v.kind, v.diagnostics).trim().to_string(),
        }),
        Err(HarnessError::Reference(m)) => issues.push(ValidationIssue::SelfJudge { detail: m }),
        Err(e) => issues.push(ValidationIssue::Infrastructure(e.to_string())),
    }
    report
}
