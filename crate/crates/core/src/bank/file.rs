//! The on-disk problem format: one TOML document per problem.
//!
//! ```toml
//! id = "index-last-zero"
//! title = "Index of last zero"
//! group = "Lab A"
//! weight = 0.00125
//! reference = { path = "index_last_zero.c" }   # or an inline string
//!
//! [signature]
//! returns = "int"
//! params = [{ kind = "int_array", len = 1 }, { kind = "int" }]
//!
//! [[tests]]
//! args = [[1, 0, 3, 0, 5], 5]
//! ```
//!
//! `language` defaults to `"c"`, `prefix` to "Create a function foo that",
//! `max_attempts` to 20, and each test's `observe` list to the return value
//! plus every mutable string.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::types::{
    default_plan, Observation, Problem, SignatureDescriptor, TestCase, Value, DEFAULT_LANGUAGE,
    DEFAULT_MAX_ATTEMPTS, DEFAULT_PREFIX,
};

#[derive(Debug, Error)]
pub enum BankError {
    #[error("problem bank directory {0} does not exist")]
    MissingDirectory(PathBuf),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("problem {id}: {message}")]
    Invalid { id: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum ReferenceField {
    Inline(String),
    File { path: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TestEntry {
    args: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    observe: Option<Vec<Observation>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    id: String,
    title: String,
    #[serde(default = "default_language")]
    language: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    group: Option<String>,
    #[serde(default = "default_prefix")]
    prefix: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    char_limit: Option<u32>,
    #[serde(default = "default_max_attempts")]
    max_attempts: u32,
    weight: f64,
    reference: ReferenceField,
    signature: SignatureDescriptor,
    tests: Vec<TestEntry>,
}

fn default_language() -> String {
    DEFAULT_LANGUAGE.to_string()
}

fn default_prefix() -> String {
    DEFAULT_PREFIX.to_string()
}

fn default_max_attempts() -> u32 {
    DEFAULT_MAX_ATTEMPTS
}

/// Parses one problem document. Relative reference paths resolve against
/// `base_dir`.
pub fn parse_problem(text: &str, base_dir: &Path) -> Result<Problem, String> {
    let file: ProblemFile = toml::from_str(text).map_err(|e| e.to_string())?;
    let reference_source = match file.reference {
        ReferenceField::Inline(s) => s,
        ReferenceField::File { path } => {
            let p = base_dir.join(&path);
            fs::read_to_string(&p).map_err(|e| format!("reference {}: {e}", p.display()))?
        }
    };
    let test_suite = file
        .tests
        .into_iter()
        .map(|t| TestCase {
            args: t.args,
            observe: t.observe.unwrap_or_else(|| default_plan(&file.signature)),
        })
        .collect();
    let problem = Problem {
        id: file.id,
        title: file.title,
        language_tag: file.language,
        group: file.group,
        reference_source,
        signature: file.signature,
        test_suite,
        char_limit: file.char_limit,
        max_attempts: file.max_attempts,
        prompt_prefix: file.prefix,
        weight: file.weight,
    };
    problem
        .check()
        .map_err(|e| format!("problem {}: {e}", problem.id))?;
    Ok(problem)
}

/// Renders a problem as a self-contained document (reference inlined).
pub fn serialize_problem(p: &Problem) -> String {
    let file = ProblemFile {
        id: p.id.clone(),
        title: p.title.clone(),
        language: p.language_tag.clone(),
        group: p.group.clone(),
        prefix: p.prompt_prefix.clone(),
        char_limit: p.char_limit,
        max_attempts: p.max_attempts,
        weight: p.weight,
        reference: ReferenceField::Inline(p.reference_source.clone()),
        signature: p.signature.clone(),
        tests: p
            .test_suite
            .iter()
            .map(|t| TestEntry {
                args: t.args.clone(),
                observe: Some(t.observe.clone()),
            })
            .collect(),
    };
    toml::to_string(&file).expect("problem documents always serialize")
}

/// A per-file problem that could not be loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadDiagnostic {
    pub path: PathBuf,
    pub message: String,
}

/// Problems keyed by id. Immutable once loaded; reloading builds a new set.
#[derive(Debug, Clone, Default)]
pub struct ProblemSet {
    problems: BTreeMap<String, Arc<Problem>>,
    pub diagnostics: Vec<LoadDiagnostic>,
}

impl ProblemSet {
    pub fn from_problems(problems: impl IntoIterator<Item = Problem>) -> Self {
        Self {
            problems: problems
                .into_iter()
                .map(|p| (p.id.clone(), Arc::new(p)))
                .collect(),
            diagnostics: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Arc<Problem>> {
        self.problems.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<Problem>> {
        self.problems.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.problems.keys().map(String::as_str)
    }

    /// Problem id → analytics group (the problem id when ungrouped).
    pub fn groups(&self) -> BTreeMap<String, String> {
        self.iter()
            .map(|p| (p.id.clone(), p.group.clone().unwrap_or_else(|| p.id.clone())))
            .collect()
    }
}

/// Loads every `*.toml` file in `root` (non-recursive, in file-name order).
/// Unparseable files and later duplicates of an id become diagnostics.
pub fn load_bank(root: impl AsRef<Path>) -> Result<ProblemSet, BankError> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(BankError::MissingDirectory(root.to_path_buf()));
    }
    let io = |source| BankError::Io {
        path: root.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(root)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "toml"))
        .collect();
    paths.sort();

    let mut set = ProblemSet::default();
    for path in paths {
        let parsed = fs::read_to_string(&path)
            .map_err(|e| e.to_string())
            .and_then(|text| parse_problem(&text, root));
        match parsed {
            Ok(p) if set.problems.contains_key(&p.id) => set.diagnostics.push(LoadDiagnostic {
                message: format!("duplicate problem id `{}`; keeping the earlier file", p.id),
                path,
            }),
            Ok(p) => {
                set.problems.insert(p.id.clone(), Arc::new(p));
            }
            Err(message) => set.diagnostics.push(LoadDiagnostic { path, message }),
        }
    }
    Ok(set)
}
