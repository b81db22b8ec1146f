use std::fmt;

use serde::{Deserialize, Serialize};

use super::csrc;

/// Default prompt stem shown in front of the student's explanation.
pub const DEFAULT_PREFIX: &str = "Create a function foo that";
pub const DEFAULT_MAX_ATTEMPTS: u32 = 20;
pub const DEFAULT_LANGUAGE: &str = "c";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnKind {
    #[serde(alias = "integer")]
    Int,
    #[serde(alias = "none")]
    Void,
}

/// Shape of one parameter of `foo`. Indices refer to other positions in the
/// same parameter list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamKind {
    Int,
    /// `int a[]` whose element count is carried by the integer param `len`.
    IntArray { len: usize },
    /// `char s[]`, observed after the call when the plan asks for it.
    MutString,
    /// `const char s[]`.
    ConstString,
    /// `int m[rows][cols]` as a C99 variably modified parameter; both
    /// dimension params must precede it.
    IntMatrix { rows: usize, cols: usize },
    /// Integer that must be a valid row of the matrix param `matrix`.
    RowIndex { matrix: usize },
}

impl ParamKind {
    pub fn is_integer(self) -> bool {
        matches!(self, ParamKind::Int | ParamKind::RowIndex { .. })
    }

    pub fn is_string(self) -> bool {
        matches!(self, ParamKind::MutString | ParamKind::ConstString)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureDescriptor {
    pub returns: ReturnKind,
    pub params: Vec<ParamKind>,
}

impl SignatureDescriptor {
    /// Checks that every index reference points at a suitable param.
    pub fn check(&self) -> Result<(), String> {
        let n = self.params.len();
        let int_at = |i: usize, what: &str, owner: usize| -> Result<(), String> {
            if i >= n {
                return Err(format!("param {owner}: {what} index {i} out of range"));
            }
            if i == owner || self.params[i] != ParamKind::Int {
                return Err(format!(
                    "param {owner}: {what} index {i} must refer to another int param"
                ));
            }
            Ok(())
        };
        for (k, p) in self.params.iter().enumerate() {
            match *p {
                ParamKind::IntArray { len } => int_at(len, "length", k)?,
                ParamKind::IntMatrix { rows, cols } => {
                    int_at(rows, "rows", k)?;
                    int_at(cols, "cols", k)?;
                    if rows == cols {
                        return Err(format!("param {k}: rows and cols share index {rows}"));
                    }
                    if rows > k || cols > k {
                        return Err(format!(
                            "param {k}: matrix dimensions must be declared before the matrix"
                        ));
                    }
                }
                ParamKind::RowIndex { matrix }
                    if !matches!(self.params.get(matrix), Some(ParamKind::IntMatrix { .. })) =>
                {
                    return Err(format!("param {k}: row index must refer to a matrix param"));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Concrete argument value in a test case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Str(String),
    IntArray(Vec<i64>),
    Matrix(Vec<Vec<i64>>),
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Str(_) => "string",
            Value::IntArray(_) => "integer array",
            Value::Matrix(_) => "integer matrix",
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_ints(&self) -> Option<&[i64]> {
        match self {
            Value::IntArray(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Matrix view; an empty array doubles as a matrix with no rows.
    pub fn as_matrix(&self) -> Option<&[Vec<i64>]> {
        match self {
            Value::Matrix(m) => Some(m),
            Value::IntArray(a) if a.is_empty() => Some(&[]),
            _ => None,
        }
    }
}

/// One observed output of a call to `foo`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Observation {
    Return,
    Arg(usize),
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::Return => f.write_str("ret"),
            Observation::Arg(k) => write!(f, "arg{k}"),
        }
    }
}

impl TryFrom<String> for Observation {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        if s == "ret" {
            return Ok(Observation::Return);
        }
        s.strip_prefix("arg")
            .and_then(|k| k.parse().ok())
            .map(Observation::Arg)
            .ok_or_else(|| format!("unknown observation `{s}` (expected `ret` or `argN`)"))
    }
}

impl From<Observation> for String {
    fn from(o: Observation) -> String {
        o.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub args: Vec<Value>,
    /// What the driver prints after the call, in this order.
    pub observe: Vec<Observation>,
}

impl TestCase {
    /// A case with the default plan for `sig`: the return value (if any)
    /// plus every mutable string.
    pub fn with_default_plan(args: Vec<Value>, sig: &SignatureDescriptor) -> Self {
        Self {
            args,
            observe: default_plan(sig),
        }
    }

    /// Checks the arguments and plan against `sig`.
    pub fn conforms(&self, sig: &SignatureDescriptor) -> Result<(), String> {
        if self.args.len() != sig.params.len() {
            return Err(format!(
                "expected {} arguments, got {}",
                sig.params.len(),
                self.args.len()
            ));
        }
        let int_range = |v: i64| i32::try_from(v).is_ok();
        for (k, (kind, value)) in sig.params.iter().zip(&self.args).enumerate() {
            let mismatch = |want: &str| {
                format!(
                    "argument {k}: expected {want}, got {}",
                    value.type_name()
                )
            };
            match *kind {
                ParamKind::Int => {
                    let v = value.as_int().ok_or_else(|| mismatch("integer"))?;
                    if !int_range(v) {
                        return Err(format!("argument {k}: {v} does not fit a C int"));
                    }
                }
                ParamKind::IntArray { len } => {
                    let Value::IntArray(a) = value else {
                        return Err(mismatch("integer array"));
                    };
                    if let Some(bad) = a.iter().find(|v| !int_range(**v)) {
                        return Err(format!("argument {k}: {bad} does not fit a C int"));
                    }
                    let n = self.args[len].as_int().unwrap_or(-1);
                    if n < 0 || n as usize > a.len() {
                        return Err(format!(
                            "argument {len}: length {n} outside 0..={} for array argument {k}",
                            a.len()
                        ));
                    }
                }
                ParamKind::MutString | ParamKind::ConstString => {
                    let Value::Str(s) = value else {
                        return Err(mismatch("string"));
                    };
                    if s.contains('\0') {
                        return Err(format!("argument {k}: strings may not contain NUL"));
                    }
                }
                ParamKind::IntMatrix { rows, cols } => {
                    let m = value.as_matrix().ok_or_else(|| mismatch("integer matrix"))?;
                    let width = m.first().map_or(0, Vec::len);
                    if m.iter().any(|r| r.len() != width) {
                        return Err(format!("argument {k}: matrix rows differ in length"));
                    }
                    if m.iter().flatten().any(|v| !int_range(*v)) {
                        return Err(format!("argument {k}: matrix value does not fit a C int"));
                    }
                    let r = self.args[rows].as_int();
                    let c = self.args[cols].as_int();
                    if r != Some(m.len() as i64) || (!m.is_empty() && c != Some(width as i64)) {
                        return Err(format!(
                            "argument {k}: dimension arguments {rows}/{cols} disagree with a {}x{} matrix",
                            m.len(),
                            width
                        ));
                    }
                    if m.is_empty() && c.is_none_or(|c| !(0..=i32::MAX as i64).contains(&c)) {
                        return Err(format!("argument {cols}: invalid column count"));
                    }
                }
                ParamKind::RowIndex { matrix } => {
                    let v = value.as_int().ok_or_else(|| mismatch("integer"))?;
                    let rows = self.args[matrix].as_matrix().map_or(0, <[_]>::len);
                    if v < 0 || v as usize >= rows {
                        return Err(format!(
                            "argument {k}: row {v} outside 0..{rows}"
                        ));
                    }
                }
            }
        }
        if self.observe.is_empty() {
            return Err("observation plan is empty".into());
        }
        for o in &self.observe {
            match *o {
                Observation::Return if sig.returns == ReturnKind::Void => {
                    return Err("cannot observe the return value of a void function".into())
                }
                Observation::Arg(k) => match sig.params.get(k) {
                    None => return Err(format!("observation arg{k} out of range")),
                    Some(p) if p.is_integer() => {
                        return Err(format!("observation arg{k}: scalar arguments are not observable"))
                    }
                    _ => {}
                },
                _ => {}
            }
        }
        for (k, p) in sig.params.iter().enumerate() {
            if *p == ParamKind::MutString && !self.observe.contains(&Observation::Arg(k)) {
                return Err(format!(
                    "mutable string argument {k} must be observed after the call"
                ));
            }
        }
        Ok(())
    }
}

pub fn default_plan(sig: &SignatureDescriptor) -> Vec<Observation> {
    let mut plan = Vec::new();
    if sig.returns == ReturnKind::Int {
        plan.push(Observation::Return);
    }
    plan.extend(
        sig.params
            .iter()
            .enumerate()
            .filter(|(_, p)| **p == ParamKind::MutString)
            .map(|(k, _)| Observation::Arg(k)),
    );
    plan
}

/// One code-explanation task.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub id: String,
    pub title: String,
    pub language_tag: String,
    /// Lab or session the task belongs to, used to group analytics.
    pub group: Option<String>,
    pub reference_source: String,
    pub signature: SignatureDescriptor,
    pub test_suite: Vec<TestCase>,
    /// Limit on the explanation, in Unicode scalar values.
    pub char_limit: Option<u32>,
    pub max_attempts: u32,
    pub prompt_prefix: String,
    /// Fraction of the course score awarded for solving.
    pub weight: f64,
}

impl Problem {
    /// Checks the structural invariants that do not need a toolchain.
    pub fn check(&self) -> Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("id is empty".into());
        }
        if self.char_limit == Some(0) {
            return Err("char_limit must be at least 1".into());
        }
        if self.max_attempts == 0 {
            return Err("max_attempts must be at least 1".into());
        }
        if !(self.weight.is_finite() && self.weight >= 0.0) {
            return Err(format!("weight {} is not a non-negative fraction", self.weight));
        }
        self.signature.check()?;
        let exported = csrc::exported_functions(&self.reference_source);
        if exported != ["foo"] {
            return Err(format!(
                "reference must define exactly one non-static function named foo, found {exported:?}"
            ));
        }
        if self.test_suite.is_empty() {
            return Err("test suite is empty".into());
        }
        for (i, case) in self.test_suite.iter().enumerate() {
            case.conforms(&self.signature)
                .map_err(|e| format!("test case {i}: {e}"))?;
        }
        Ok(())
    }
}
