//! Test driver synthesis.
//!
//! The driver and the code under test share one translation unit. The driver
//! declares `foo`'s prototype before the code under test, so a definition
//! with the wrong arity or parameter types fails to compile instead of
//! invoking undefined behaviour. Each observed value is written to stdout as
//! a framed record:
//!
//! ```text
//! @@<nonce>@@ <len>:case <i> ret=<v>
//! @@<nonce>@@ <len>:case <i> arg<k>=<contents>
//! ```
//!
//! `<nonce>` comes from the `EIPE_RUN_NONCE` environment variable at run
//! time and `<len>` is the byte length of the payload, so stray output from
//! the code under test can neither forge nor split a record. Arrays print as
//! comma-separated values, matrices as rows joined by `;`, strings verbatim
//! between `<<<` and `>>>`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::bank::{csrc, Observation, ParamKind, ReturnKind, SignatureDescriptor, TestCase, Value};

pub const NONCE_ENV: &str = "EIPE_RUN_NONCE";
pub const STRING_OPEN: &str = "<<<";
pub const STRING_CLOSE: &str = ">>>";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DriverError {
    #[error("test suite is empty")]
    EmptySuite,
    #[error("unsupported signature: {0}")]
    UnsupportedSignature(String),
    #[error("test case {index}: {message}")]
    InvalidCase { index: usize, message: String },
}

const PRELUDE: &str = "#define _POSIX_C_SOURCE 200809L
#include <ctype.h>
#include <limits.h>
#include <math.h>
#include <stdbool.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
";

const SUPPORT: &str = r#"
typedef struct { char *p; size_t n, cap; } eipe_buf_;

static void eipe_put_(eipe_buf_ *b, const char *s, size_t n) {
    if (b->n + n + 1 > b->cap) {
        size_t cap = (b->cap ? b->cap * 2 : 64);
        while (cap < b->n + n + 1) cap *= 2;
        b->p = realloc(b->p, cap);
        if (!b->p) abort();
        b->cap = cap;
    }
    memcpy(b->p + b->n, s, n);
    b->n += n;
}

static void eipe_puts_(eipe_buf_ *b, const char *s) { eipe_put_(b, s, strlen(s)); }

static void eipe_puti_(eipe_buf_ *b, long long v) {
    char t[32];
    int k = snprintf(t, sizeof t, "%lld", v);
    eipe_put_(b, t, (size_t)k);
}

static const char *eipe_nonce_ = "";

static void eipe_begin_(eipe_buf_ *b, int c, const char *what) {
    eipe_puts_(b, "case ");
    eipe_puti_(b, c);
    eipe_puts_(b, " ");
    eipe_puts_(b, what);
    eipe_puts_(b, "=");
}

static void eipe_emit_(eipe_buf_ *b) {
    printf("@@%s@@ %zu:", eipe_nonce_, b->n);
    if (b->n) fwrite(b->p, 1, b->n, stdout);
    fputc('\n', stdout);
    fflush(stdout);
    free(b->p);
}

static void eipe_obs_int_(int c, const char *what, long long v) {
    eipe_buf_ b = {0};
    eipe_begin_(&b, c, what);
    eipe_puti_(&b, v);
    eipe_emit_(&b);
}

static void eipe_obs_ints_(int c, const char *what, const int *a, size_t n) {
    eipe_buf_ b = {0};
    eipe_begin_(&b, c, what);
    for (size_t i = 0; i < n; i++) {
        if (i) eipe_puts_(&b, ",");
        eipe_puti_(&b, a[i]);
    }
    eipe_emit_(&b);
}

static void eipe_obs_matrix_(int c, const char *what, const int *a, size_t rows, size_t cols) {
    eipe_buf_ b = {0};
    eipe_begin_(&b, c, what);
    for (size_t r = 0; r < rows; r++) {
        if (r) eipe_puts_(&b, ";");
        for (size_t k = 0; k < cols; k++) {
            if (k) eipe_puts_(&b, ",");
            eipe_puti_(&b, a[r * cols + k]);
        }
    }
    eipe_emit_(&b);
}

static void eipe_obs_str_(int c, const char *what, const char *s, size_t cap) {
    eipe_buf_ b = {0};
    size_t n = 0;
    while (n < cap && s[n]) n++;
    eipe_begin_(&b, c, what);
    eipe_puts_(&b, "<<<");
    eipe_put_(&b, s, n);
    eipe_puts_(&b, ">>>");
    eipe_emit_(&b);
}

static void *eipe_alloc_(size_t bytes) {
    void *p = malloc(bytes ? bytes : 1);
    if (!p) abort();
    return p;
}
"#;

/// A synthesized driver for one signature and suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Driver {
    sig: SignatureDescriptor,
    entry: String,
    case_count: usize,
}

fn c_int(v: i64) -> String {
    if v == i32::MIN as i64 {
        "(-2147483647 - 1)".to_string()
    } else {
        v.to_string()
    }
}

/// Escapes `s` as a C string literal body. Every byte outside a safe
/// printable set becomes a three-digit octal escape.
pub fn c_string_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for &b in s.as_bytes() {
        if (b.is_ascii_alphanumeric() || b" _.,;:!-+*/=<>()[]{}#%&|^~@$'".contains(&b)) && b != b'?' {
            out.push(b as char);
        } else {
            let _ = write!(out, "\\{b:03o}");
        }
    }
    out.push('"');
    out
}

impl Driver {
    pub fn signature(&self) -> &SignatureDescriptor {
        &self.sig
    }

    pub fn case_count(&self) -> usize {
        self.case_count
    }

    /// The entry-point source (support routines plus `main`).
    pub fn entry_source(&self) -> &str {
        &self.entry
    }

    /// Prototype for `foo`. `const_params[k]` adds a `const` qualifier to
    /// pointer-like parameter `k`, so a definition that differs from the
    /// declared shape only in const-ness still matches.
    pub fn prototype(&self, const_params: &[bool]) -> String {
        let ret = match self.sig.returns {
            ReturnKind::Int => "int",
            ReturnKind::Void => "void",
        };
        let name = |k: usize| format!("eipe_a{k}_");
        let params: Vec<String> = self
            .sig
            .params
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let konst = if const_params.get(k).copied().unwrap_or(false) {
                    "const "
                } else {
                    ""
                };
                match *p {
                    ParamKind::Int | ParamKind::RowIndex { .. } => format!("int {}", name(k)),
                    ParamKind::IntArray { .. } => format!("{konst}int {}[]", name(k)),
                    ParamKind::MutString => format!("{konst}char {}[]", name(k)),
                    ParamKind::ConstString => {
                        // declared read-only unless the definition says otherwise
                        let konst = if const_params.get(k) == Some(&false) {
                            ""
                        } else {
                            "const "
                        };
                        format!("{konst}char {}[]", name(k))
                    }
                    ParamKind::IntMatrix { rows, cols } => {
                        format!("{konst}int {}[{}][{}]", name(k), name(rows), name(cols))
                    }
                }
            })
            .collect();
        let params = if params.is_empty() {
            "void".to_string()
        } else {
            params.join(", ")
        };
        format!("{ret} foo({params});")
    }

    /// The complete translation unit compiling `code` against this driver.
    pub fn translation_unit(&self, code: &str) -> String {
        let constness = csrc::param_constness(code, "foo")
            .filter(|c| c.len() == self.sig.params.len())
            .unwrap_or_default();
        let mut tu = String::with_capacity(PRELUDE.len() + code.len() + self.entry.len() + 256);
        tu.push_str(PRELUDE);
        tu.push_str(&self.prototype(&constness));
        tu.push_str("\n#line 1 \"solution.c\"\n");
        tu.push_str(code);
        if !code.ends_with('\n') {
            tu.push('\n');
        }
        tu.push_str("#line 1 \"driver.c\"\n");
        tu.push_str(&self.entry);
        tu
    }
}

/// Builds the driver for `suite`, which must be non-empty and conform to
/// `sig`.
pub fn synthesize_driver(sig: &SignatureDescriptor, suite: &[TestCase]) -> Result<Driver, DriverError> {
    sig.check().map_err(DriverError::UnsupportedSignature)?;
    if suite.is_empty() {
        return Err(DriverError::EmptySuite);
    }
    let mut main = String::new();
    main.push_str("int main(void) {\n");
    let _ = writeln!(main, "    const char *nonce = getenv(\"{NONCE_ENV}\");");
    main.push_str("    if (nonce) eipe_nonce_ = nonce;\n");
    for (i, case) in suite.iter().enumerate() {
        case.conforms(sig).map_err(|message| DriverError::InvalidCase { index: i, message })?;
        emit_case(&mut main, sig, i, case);
    }
    main.push_str("    return 0;\n}\n");
    let mut entry = String::from(SUPPORT);
    entry.push('\n');
    entry.push_str(&main);
    Ok(Driver {
        sig: sig.clone(),
        entry,
        case_count: suite.len(),
    })
}

fn emit_case(out: &mut String, sig: &SignatureDescriptor, index: usize, case: &TestCase) {
    let v = |k: usize| format!("v{k}");
    let _ = writeln!(out, "    {{ /* case {index} */");
    for (k, (kind, value)) in sig.params.iter().zip(&case.args).enumerate() {
        match (kind, value) {
            (ParamKind::Int | ParamKind::RowIndex { .. }, Value::Int(x)) => {
                let _ = writeln!(out, "        int {} = {};", v(k), c_int(*x));
            }
            (ParamKind::IntArray { .. }, Value::IntArray(a)) => {
                let _ = writeln!(out, "        int *{} = eipe_alloc_({} * sizeof(int));", v(k), a.len());
                if !a.is_empty() {
                    let init: Vec<_> = a.iter().map(|x| c_int(*x)).collect();
                    let _ = writeln!(
                        out,
                        "        {{ static const int init[] = {{{}}}; memcpy({}, init, sizeof init); }}",
                        init.join(", "),
                        v(k)
                    );
                }
            }
            (ParamKind::MutString | ParamKind::ConstString, Value::Str(s)) => {
                let _ = writeln!(out, "        char *{} = eipe_alloc_({});", v(k), s.len() + 1);
                let _ = writeln!(out, "        memcpy({}, {}, {});", v(k), c_string_literal(s), s.len() + 1);
            }
            (ParamKind::IntMatrix { rows, cols }, value) => {
                let m = value.as_matrix().unwrap_or(&[]);
                let _ = writeln!(
                    out,
                    "        int (*{})[{}] = eipe_alloc_((size_t){} * (size_t){} * sizeof(int));",
                    v(k),
                    v(*cols),
                    v(*rows),
                    v(*cols)
                );
                if !m.is_empty() && !m[0].is_empty() {
                    let init: Vec<_> = m.iter().flatten().map(|x| c_int(*x)).collect();
                    let _ = writeln!(
                        out,
                        "        {{ static const int init[] = {{{}}}; memcpy({}, init, sizeof init); }}",
                        init.join(", "),
                        v(k)
                    );
                }
            }
            _ => unreachable!("case conformity was checked"),
        }
    }
    let args: Vec<_> = (0..sig.params.len()).map(v).collect();
    let call = format!("foo({})", args.join(", "));
    match sig.returns {
        ReturnKind::Int => {
            let _ = writeln!(out, "        int ret = {call};");
        }
        ReturnKind::Void => {
            let _ = writeln!(out, "        {call};");
        }
    }
    for obs in &case.observe {
        match *obs {
            Observation::Return => {
                let _ = writeln!(out, "        eipe_obs_int_({index}, \"ret\", ret);");
            }
            Observation::Arg(k) => {
                let what = format!("arg{k}");
                match (&sig.params[k], &case.args[k]) {
                    (ParamKind::IntArray { .. }, Value::IntArray(a)) => {
                        let _ = writeln!(out, "        eipe_obs_ints_({index}, \"{what}\", {}, {});", v(k), a.len());
                    }
                    (ParamKind::MutString | ParamKind::ConstString, Value::Str(s)) => {
                        let _ = writeln!(out, "        eipe_obs_str_({index}, \"{what}\", {}, {});", v(k), s.len() + 1);
                    }
                    (ParamKind::IntMatrix { rows, cols }, _) => {
                        let _ = writeln!(
                            out,
                            "        eipe_obs_matrix_({index}, \"{what}\", &{}[0][0], (size_t){}, (size_t){});",
                            v(k),
                            v(*rows),
                            v(*cols)
                        );
                    }
                    _ => unreachable!("observation plan was checked"),
                }
            }
        }
    }
    let _ = writeln!(out, "    }}");
}

/// Canonical observations for each case, recovered from a run's stdout.
/// `None` marks a case that produced no records.
pub fn parse_observations(stdout: &[u8], nonce: &str, case_count: usize) -> Vec<Option<String>> {
    let marker = format!("@@{nonce}@@ ");
    let marker = marker.as_bytes();
    let mut per_case: Vec<Vec<String>> = vec![Vec::new(); case_count];
    let mut i = 0;
    while let Some(pos) = find(&stdout[i..], marker) {
        let mut j = i + pos + marker.len();
        let digits_start = j;
        while j < stdout.len() && stdout[j].is_ascii_digit() {
            j += 1;
        }
        let len: Option<usize> = std::str::from_utf8(&stdout[digits_start..j])
            .ok()
            .and_then(|d| d.parse().ok());
        match (len, stdout.get(j)) {
            (Some(len), Some(b':')) if j + 1 + len <= stdout.len() => {
                let payload = String::from_utf8_lossy(&stdout[j + 1..j + 1 + len]).into_owned();
                if let Some(case) = payload
                    .strip_prefix("case ")
                    .and_then(|r| r.split(' ').next())
                    .and_then(|c| c.parse::<usize>().ok())
                {
                    if case < case_count {
                        per_case[case].push(payload);
                    }
                }
                i = j + 1 + len;
            }
            _ => i = digits_start,
        }
    }
    per_case
        .into_iter()
        .map(|lines| (!lines.is_empty()).then(|| lines.join("\n")))
        .collect()
}

fn find(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).position(|w| w == needle)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn array_sig() -> SignatureDescriptor {
        SignatureDescriptor {
            returns: ReturnKind::Int,
            params: vec![ParamKind::IntArray { len: 1 }, ParamKind::Int],
        }
    }

    #[test]
    fn array_case_calls_foo_and_prints_ret() {
        let case = TestCase::with_default_plan(
            vec![Value::IntArray(vec![1, 0, 3, 0, 5]), Value::Int(5)],
            &array_sig(),
        );
        let d = synthesize_driver(&array_sig(), &[case]).unwrap();
        let src = d.entry_source();
        assert!(src.contains("static const int init[] = {1, 0, 3, 0, 5};"));
        assert!(src.contains("int ret = foo(v0, v1);"));
        assert!(src.contains("eipe_obs_int_(0, \"ret\", ret);"));
        assert_eq!(d.prototype(&[]), "int foo(int eipe_a0_[], int eipe_a1_);");
    }

    #[test]
    fn mutable_string_observed() {
        let sig = SignatureDescriptor {
            returns: ReturnKind::Void,
            params: vec![ParamKind::MutString],
        };
        let case = TestCase::with_default_plan(vec![Value::Str("abc".into())], &sig);
        let d = synthesize_driver(&sig, &[case]).unwrap();
        assert!(d.entry_source().contains("eipe_obs_str_(0, \"arg0\", v0, 4);"));
        assert!(d.entry_source().contains("foo(v0);"));
        assert_eq!(d.prototype(&[]), "void foo(char eipe_a0_[]);");
    }

    #[test]
    fn empty_suite_rejected() {
        assert_eq!(synthesize_driver(&array_sig(), &[]), Err(DriverError::EmptySuite));
    }

    #[test]
    fn const_adaptation() {
        let sig = SignatureDescriptor {
            returns: ReturnKind::Int,
            params: vec![ParamKind::ConstString, ParamKind::ConstString],
        };
        let case = TestCase::with_default_plan(vec![Value::Str("a".into()), Value::Str("b".into())], &sig);
        let d = synthesize_driver(&sig, &[case]).unwrap();
        assert_eq!(d.prototype(&[]), "int foo(const char eipe_a0_[], const char eipe_a1_[]);");
        let tu = d.translation_unit("int foo(char *a, const char *b) { return 0; }");
        assert!(tu.contains("int foo(char eipe_a0_[], const char eipe_a1_[]);"));
    }

    #[test]
    fn literal_escaping() {
        assert_eq!(c_string_literal("ab c"), "\"ab c\"");
        assert_eq!(c_string_literal("a\"b\\"), "\"a\\042b\\134\"");
        assert_eq!(c_string_literal("??="), "\"\\077\\077=\"");
        assert_eq!(c_string_literal("é"), "\"\\303\\251\"");
    }

    #[test]
    fn parses_framed_records_ignoring_noise() {
        let out = b"noise @@n1@@ 12:case 0 ret=3\n@@n1@@ 19:case 1 arg0=<<<\n>>>\njunk@@n1@@ 99:trunc";
        let obs = parse_observations(out, "n1", 3);
        assert_eq!(obs[0].as_deref(), Some("case 0 ret=3"));
        assert_eq!(obs[1].as_deref(), Some("case 1 arg0=<<<\n>>>"));
        assert_eq!(obs[2], None);
    }

    #[test]
    fn forged_records_without_nonce_are_ignored() {
        let out = b"@@other@@ 12:case 0 ret=9\n@@n@@ 12:case 0 ret=3\n";
        assert_eq!(parse_observations(out, "n", 1)[0].as_deref(), Some("case 0 ret=3"));
    }
}
