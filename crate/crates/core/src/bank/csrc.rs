//! Just enough of a C lexer to find top-level function definitions and
//! rename identifiers at token granularity.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Number,
    Str,
    Char,
    Punct,
    Preproc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Range<usize>,
}

impl Token {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.span.clone()]
    }
}

/// Tokenizes C source, dropping whitespace and comments. Preprocessor
/// directives (including continuation lines) become a single token.
pub fn tokenize(src: &str) -> Vec<Token> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line_start = true;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line_start = true;
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            i += 2;
            while i < bytes.len() && !(bytes[i] == b'*' && bytes.get(i + 1) == Some(&b'/')) {
                i += 1;
            }
            i = (i + 2).min(bytes.len());
            continue;
        }
        let start = i;
        if c == b'#' && line_start {
            while i < bytes.len() && bytes[i] != b'\n' {
                if bytes[i] == b'\\' && bytes.get(i + 1) == Some(&b'\n') {
                    i += 2;
                    continue;
                }
                i += 1;
            }
            out.push(Token {
                kind: TokenKind::Preproc,
                span: start..i,
            });
            continue;
        }
        line_start = false;
        if c == b'_' || c.is_ascii_alphabetic() {
            while i < bytes.len() && (bytes[i] == b'_' || bytes[i].is_ascii_alphanumeric()) {
                i += 1;
            }
            out.push(Token {
                kind: TokenKind::Ident,
                span: start..i,
            });
        } else if c.is_ascii_digit() {
            while i < bytes.len() && (bytes[i] == b'.' || bytes[i].is_ascii_alphanumeric()) {
                i += 1;
            }
            out.push(Token {
                kind: TokenKind::Number,
                span: start..i,
            });
        } else if c == b'"' || c == b'\'' {
            i += 1;
            while i < bytes.len() && bytes[i] != c && bytes[i] != b'\n' {
                if bytes[i] == b'\\' {
                    i += 1;
                }
                i += 1;
            }
            i = (i + 1).min(bytes.len());
            out.push(Token {
                kind: if c == b'"' {
                    TokenKind::Str
                } else {
                    TokenKind::Char
                },
                span: start..i,
            });
        } else {
            // multi-byte UTF-8 outside literals is not valid C; keep it whole
            let len = src[i..].chars().next().map_or(1, char::len_utf8);
            i += if c == b'-' && bytes.get(i + 1) == Some(&b'>') {
                2
            } else {
                len
            };
            out.push(Token {
                kind: TokenKind::Punct,
                span: start..i,
            });
        }
    }
    out
}

const TYPE_WORDS: &[&str] = &[
    "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned", "const",
    "volatile", "restrict", "struct", "union", "enum", "static", "extern", "inline", "register",
    "bool", "_Bool", "size_t", "int8_t", "int16_t", "int32_t", "int64_t", "uint8_t", "uint16_t",
    "uint32_t", "uint64_t",
];

/// One declared parameter of a function definition.
#[derive(Debug, Clone)]
pub struct ParamDecl {
    /// Token indices making up the declaration.
    pub tokens: Range<usize>,
    /// Token index of the declared name, if the parameter is named.
    pub name: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct FunctionDef {
    pub name: String,
    pub name_token: usize,
    pub is_static: bool,
    pub params: Vec<ParamDecl>,
    /// Token range from the opening parenthesis to the closing brace.
    pub extent: Range<usize>,
}

fn punct(tokens: &[Token], src: &str, i: usize, p: &str) -> bool {
    tokens
        .get(i)
        .is_some_and(|t| t.kind == TokenKind::Punct && t.text(src) == p)
}

fn matching(tokens: &[Token], src: &str, open: usize, o: &str, c: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (j, _) in tokens.iter().enumerate().skip(open) {
        if punct(tokens, src, j, o) {
            depth += 1;
        } else if punct(tokens, src, j, c) {
            depth -= 1;
            if depth == 0 {
                return Some(j);
            }
        }
    }
    None
}

fn matching_back(tokens: &[Token], src: &str, close: usize, o: &str, c: &str) -> Option<usize> {
    let mut depth = 0usize;
    for j in (0..=close).rev() {
        if punct(tokens, src, j, c) {
            depth += 1;
        } else if punct(tokens, src, j, o) {
            depth -= 1;
            if depth == 0 {
                return Some(j);
            }
        }
    }
    None
}

fn parse_params(tokens: &[Token], src: &str, open: usize, close: usize) -> Vec<ParamDecl> {
    let mut params = Vec::new();
    let mut start = open + 1;
    let mut depth = 0i32;
    for j in open + 1..=close {
        let at_end = j == close;
        if !at_end {
            if punct(tokens, src, j, "(") || punct(tokens, src, j, "[") {
                depth += 1;
            } else if punct(tokens, src, j, ")") || punct(tokens, src, j, "]") {
                depth -= 1;
            }
        }
        if at_end || (depth == 0 && punct(tokens, src, j, ",")) {
            if j > start {
                params.push(param_decl(tokens, src, start..j));
            }
            start = j + 1;
        }
    }
    if params.len() == 1 {
        let only = &params[0];
        if only.tokens.len() == 1 && tokens[only.tokens.start].text(src) == "void" {
            params.clear();
        }
    }
    params
}

fn param_decl(tokens: &[Token], src: &str, range: Range<usize>) -> ParamDecl {
    // everything from the first top-level '[' on is array extent
    let mut depth = 0i32;
    let mut end = range.end;
    for j in range.clone() {
        if punct(tokens, src, j, "(") {
            depth += 1;
        } else if punct(tokens, src, j, ")") {
            depth -= 1;
        } else if depth == 0 && punct(tokens, src, j, "[") {
            end = j;
            break;
        }
    }
    let name = (range.start..end).rev().find(|&j| {
        tokens[j].kind == TokenKind::Ident && !TYPE_WORDS.contains(&tokens[j].text(src))
    });
    // a lone identifier such as `foo(size)` without a type is still a name,
    // but `foo(mytype)` with nothing else would be a type; accept only when
    // something precedes it
    let name = name.filter(|&j| j > range.start || end - range.start > 1);
    ParamDecl {
        tokens: range,
        name,
    }
}

/// Finds every function definition at file scope.
pub fn top_level_functions(src: &str, tokens: &[Token]) -> Vec<FunctionDef> {
    let mut out = Vec::new();
    let mut stmt_start = 0;
    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        if t.kind == TokenKind::Preproc {
            i += 1;
            stmt_start = i;
            continue;
        }
        if punct(tokens, src, i, ";") {
            i += 1;
            stmt_start = i;
            continue;
        }
        if punct(tokens, src, i, "{") {
            let Some(close) = matching(tokens, src, i, "{", "}") else {
                break;
            };
            let mut is_function = false;
            if i > 0 && punct(tokens, src, i - 1, ")") {
                if let Some(open) = matching_back(tokens, src, i - 1, "(", ")") {
                    if open > 0 && tokens[open - 1].kind == TokenKind::Ident {
                        is_function = true;
                        let name_token = open - 1;
                        let is_static = (stmt_start..name_token)
                            .any(|j| tokens[j].text(src) == "static");
                        out.push(FunctionDef {
                            name: tokens[name_token].text(src).to_string(),
                            name_token,
                            is_static,
                            params: parse_params(tokens, src, open, i - 1),
                            extent: open..close + 1,
                        });
                    }
                }
            }
            i = close + 1;
            // `struct s { ... } x;` continues the same declaration
            if is_function {
                stmt_start = i;
            }
            continue;
        }
        i += 1;
    }
    out
}

/// Names of externally visible (non-static) function definitions.
pub fn exported_functions(src: &str) -> Vec<String> {
    let tokens = tokenize(src);
    top_level_functions(src, &tokens)
        .into_iter()
        .filter(|f| !f.is_static)
        .map(|f| f.name)
        .collect()
}

/// Per-parameter `const` qualification of the definition of `name`, if the
/// source defines it.
pub fn param_constness(src: &str, name: &str) -> Option<Vec<bool>> {
    let tokens = tokenize(src);
    let f = top_level_functions(src, &tokens)
        .into_iter()
        .find(|f| f.name == name)?;
    Some(
        f.params
            .iter()
            .map(|p| p.tokens.clone().any(|j| tokens[j].text(src) == "const"))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_definitions_and_skips_prototypes() {
        let src = "#include <stdio.h>\nint helper(int);\nstatic int helper(int x) { return x; }\n\
                   struct pt { int x; };\nint foo(int vals[], int n) { return helper(n); }\n";
        let toks = tokenize(src);
        let fns = top_level_functions(src, &toks);
        assert_eq!(fns.len(), 2);
        assert_eq!(fns[0].name, "helper");
        assert!(fns[0].is_static);
        assert_eq!(fns[1].name, "foo");
        assert!(!fns[1].is_static);
        let names: Vec<_> = fns[1]
            .params
            .iter()
            .map(|p| toks[p.name.unwrap()].text(src))
            .collect();
        assert_eq!(names, ["vals", "n"]);
    }

    #[test]
    fn vla_and_pointer_params() {
        let src = "int foo(int rows, int cols, int m[rows][cols], int (*q)[4], const char *s) { return 0; }";
        let toks = tokenize(src);
        let f = &top_level_functions(src, &toks)[0];
        let names: Vec<_> = f
            .params
            .iter()
            .map(|p| p.name.map(|j| toks[j].text(src)))
            .collect();
        assert_eq!(
            names,
            [Some("rows"), Some("cols"), Some("m"), Some("q"), Some("s")]
        );
    }

    #[test]
    fn void_param_list_is_empty() {
        let src = "int foo(void) { return 1; }";
        let toks = tokenize(src);
        assert!(top_level_functions(src, &toks)[0].params.is_empty());
    }

    #[test]
    fn comments_and_literals_do_not_confuse_braces() {
        let src = "/* { */ int foo(char *s) { char c = '}'; const char *t = \"{{\"; // }\n return c; }";
        assert_eq!(exported_functions(src), ["foo"]);
    }

    #[test]
    fn constness_per_param() {
        let src = "int foo(const char *a, char b[]) { return 0; }";
        assert_eq!(param_constness(src, "foo"), Some(vec![true, false]));
        assert_eq!(param_constness(src, "bar"), None);
    }
}
