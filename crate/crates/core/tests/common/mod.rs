#![allow(dead_code)]

pub mod fixtures;
pub mod oracle;

use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use eipe_core::bank::ProblemSet;
use eipe_core::engine::EngineConfig;
use eipe_core::gateway::{MockBackend, MockFixture};
use eipe_core::{load_bank, Gateway, GradingEngine, Harness};

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn bank_dir() -> PathBuf {
    workspace_root().join("bank")
}

pub fn bank() -> ProblemSet {
    let set = load_bank(bank_dir()).expect("bank directory");
    assert!(set.diagnostics.is_empty(), "{:?}", set.diagnostics);
    set
}

pub fn harness() -> Arc<Harness> {
    static H: OnceLock<Arc<Harness>> = OnceLock::new();
    H.get_or_init(|| Arc::new(Harness::with_defaults().expect("C toolchain"))).clone()
}

pub fn mock_gateway() -> Arc<Gateway> {
    let fixture = MockFixture::load(workspace_root().join("fixtures/mock.toml")).unwrap();
    Arc::new(Gateway::new(Arc::new(MockBackend::new(fixture))))
}

pub fn mock_engine() -> GradingEngine {
    GradingEngine::in_memory(bank(), mock_gateway(), harness(), EngineConfig::default())
}

/// Reply text containing `code` in a fenced block.
pub fn fenced(code: &str) -> String {
    format!("Here you go:\n```c\n{code}\n```\n")
}

/// A prompt per bank problem that the mock fixture answers correctly.
pub const CORRECT_PROMPTS: [(&str, &str); 8] = [
    ("contains-substring", "returns 1 if the second string appears inside the first, else 0"),
    ("contains-vowel", "returns 1 if the string contains a vowel, otherwise 0"),
    ("count-even", "counts the even numbers in the first n elements of the array"),
    ("index-last-zero", "returns the index of the last zero in the array, or -1 if there is none"),
    ("reverse-string", "flips a string"),
    ("row-sum", "returns the sum of one row r of a 2D array"),
    ("sum-between", "returns the sum of all integers between a and b inclusive"),
    ("sum-positive", "adds up the positive values in the array"),
];
