//! Grading service for "explain in plain English" code-comprehension tasks.
//!
//! A student reads an obfuscated C function and describes what it does. The
//! description becomes a prompt for a code-generation backend, and the code
//! that comes back is judged against the reference implementation by running
//! both under the same synthesized test driver.
//!
//! The crate is split by responsibility:
//!
//! - [`bank`]: problem definitions, validation and identifier obfuscation.
//! - [`gateway`]: prompt assembly, generation backends and code extraction.
//! - [`harness`]: driver synthesis, sandboxed compile/run and the judge.
//! - [`engine`]: the attempt lifecycle and the append-only attempt log.
//! - [`analytics`]: task statistics, SOLO cross-tabs, kappa, Likert and
//!   prompt reliability reports.

pub mod analytics;
pub mod bank;
pub mod engine;
pub mod gateway;
pub mod harness;
pub mod sync;
pub mod text;

pub use bank::{
    load_bank, LoadDiagnostic, ParamKind, Problem, ProblemSet, SignatureDescriptor, TestCase,
    Value,
};
pub use engine::{Attempt, AttemptOutcome, GradingEngine, SubmitError};
pub use gateway::{Backend, Completion, GenerationRequest, Gateway, Variability};
pub use harness::{CaseResult, Harness, ResourceLimits, Verdict, VerdictKind};
