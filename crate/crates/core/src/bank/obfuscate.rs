//! Token-level renaming of the graded function and its parameters, so the
//! statement shown to students does not give the purpose away by name.

use std::collections::BTreeMap;

use thiserror::Error;

use super::csrc::{self, TokenKind};
use super::types::SignatureDescriptor;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObfuscateError {
    #[error("no function definition with {0} parameters found")]
    NotFound(usize),
    #[error("several candidate functions with {0} parameters: {1:?}")]
    Ambiguous(usize, Vec<String>),
    #[error("parameter {0} has no name to rename")]
    UnnamedParam(usize),
    #[error("renaming would collide with existing identifier `{0}`")]
    Collision(String),
}

/// Positional name given to parameter `k`.
pub fn param_name(k: usize) -> String {
    format!("p{k}")
}

/// Renames the function matching `sig` to `foo` and its parameters to
/// `p0, p1, ...`. Everything else is left byte-for-byte intact.
pub fn obfuscate_identifiers(source: &str, sig: &SignatureDescriptor) -> Result<String, ObfuscateError> {
    let tokens = csrc::tokenize(source);
    let arity = sig.params.len();
    let funcs: Vec<_> = csrc::top_level_functions(source, &tokens)
        .into_iter()
        .filter(|f| !f.is_static && f.params.len() == arity)
        .collect();
    let target = match funcs.as_slice() {
        [] => return Err(ObfuscateError::NotFound(arity)),
        [only] => only,
        many => many.iter().find(|f| f.name == "foo").ok_or_else(|| {
            ObfuscateError::Ambiguous(arity, many.iter().map(|f| f.name.clone()).collect())
        })?,
    };

    // token index -> new text
    let mut renames: BTreeMap<usize, String> = BTreeMap::new();
    let is_member = |j: usize| {
        j > 0
            && tokens[j - 1].kind == TokenKind::Punct
            && matches!(tokens[j - 1].text(source), "." | "->")
    };
    for (j, t) in tokens.iter().enumerate() {
        if t.kind == TokenKind::Ident && t.text(source) == target.name && !is_member(j) {
            renames.insert(j, "foo".to_string());
        }
    }
    for (k, p) in target.params.iter().enumerate() {
        let name_tok = p.name.ok_or(ObfuscateError::UnnamedParam(k))?;
        let old = tokens[name_tok].text(source);
        for j in target.extent.clone() {
            if tokens[j].kind == TokenKind::Ident && tokens[j].text(source) == old && !is_member(j) {
                renames.insert(j, param_name(k));
            }
        }
    }

    let targets: Vec<String> = std::iter::once("foo".to_string())
        .chain((0..arity).map(param_name))
        .collect();
    for (j, t) in tokens.iter().enumerate() {
        if t.kind == TokenKind::Ident
            && !renames.contains_key(&j)
            && targets.iter().any(|n| n == t.text(source))
        {
            return Err(ObfuscateError::Collision(t.text(source).to_string()));
        }
    }

    let mut out = String::with_capacity(source.len());
    let mut last = 0;
    for (j, new) in &renames {
        let span = &tokens[*j].span;
        out.push_str(&source[last..span.start]);
        out.push_str(new);
        last = span.end;
    }
    out.push_str(&source[last..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bank::types::{ParamKind, ReturnKind};

    fn sig() -> SignatureDescriptor {
        SignatureDescriptor {
            returns: ReturnKind::Int,
            params: vec![ParamKind::IntArray { len: 1 }, ParamKind::Int],
        }
    }

    const LAST_ZERO: &str = "int lastZero(int vals[], int n) {\n    for (int i = n - 1; i >= 0; i--) {\n        if (vals[i] == 0) return i;\n    }\n    return -1;\n}\n";

    #[test]
    fn renames_function_and_params() {
        let out = obfuscate_identifiers(LAST_ZERO, &sig()).unwrap();
        assert!(out.starts_with("int foo(int p0[], int p1) {"), "{out}");
        assert!(out.contains("for (int i = p1 - 1;"));
        assert!(out.contains("if (p0[i] == 0) return i;"));
        assert!(!out.contains("vals") && !out.contains("lastZero"));
    }

    #[test]
    fn idempotent_on_obfuscated_source() {
        let once = obfuscate_identifiers(LAST_ZERO, &sig()).unwrap();
        let twice = obfuscate_identifiers(&once, &sig()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn collision_with_body_variable() {
        let src = "int lastZero(int vals[], int n) { int p0 = -1; for (int i = 0; i < n; i++) if (!vals[i]) p0 = i; return p0; }";
        assert_eq!(
            obfuscate_identifiers(src, &sig()),
            Err(ObfuscateError::Collision("p0".into()))
        );
    }

    #[test]
    fn recursive_calls_and_members() {
        let src = "struct s { int n; };\nint sum(int a[], int n) { struct s x; x.n = n; return n == 0 ? 0 : a[n-1] + sum(a, n - 1); }";
        let out = obfuscate_identifiers(src, &sig()).unwrap();
        assert!(out.contains("struct s { int n; };"));
        assert!(out.contains("x.n = p1;"));
        assert!(out.contains("foo(p0, p1 - 1)"));
    }

    #[test]
    fn static_helpers_are_not_targets() {
        let src = "static int twice(int a[], int n) { return 2 * n; }\nint total(int a[], int n) { return twice(a, n); }";
        let out = obfuscate_identifiers(src, &sig()).unwrap();
        assert!(out.contains("static int twice(int a[], int n)"));
        assert!(out.contains("int foo(int p0[], int p1) { return twice(p0, p1); }"));
    }

    #[test]
    fn arity_not_found() {
        let src = "int f(int a) { return a; }";
        assert_eq!(obfuscate_identifiers(src, &sig()), Err(ObfuscateError::NotFound(2)));
    }
}
