//! The problem bank: task definitions, their on-disk format, validation
//! against the harness, and statement obfuscation.

pub mod csrc;
mod file;
mod obfuscate;
mod types;
mod validate;

pub use file::{load_bank, parse_problem, serialize_problem, BankError, LoadDiagnostic, ProblemSet};
pub use obfuscate::{obfuscate_identifiers, param_name, ObfuscateError};
pub use types::{
    default_plan, Observation, ParamKind, Problem, ReturnKind, SignatureDescriptor, TestCase,
    Value, DEFAULT_LANGUAGE, DEFAULT_MAX_ATTEMPTS, DEFAULT_PREFIX,
};
pub use validate::{validate_problem, ValidationIssue, ValidationReport};
