//! Pulls compilable source out of a model reply that may mix prose and code.

const FENCE: &str = "```";

/// Returns the concatenated contents of all fenced blocks, or failing that
/// everything from the first line that looks like a definition of `foo`.
/// Lines containing a fence marker never appear in the result.
pub fn extract_code(raw_text: &str) -> Option<String> {
    let mut blocks: Vec<String> = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in raw_text.lines() {
        if line.contains(FENCE) {
            match current.take() {
                Some(lines) => blocks.push(lines.join("\n")),
                None => current = Some(Vec::new()),
            }
            continue;
        }
        if let Some(lines) = current.as_mut() {
            lines.push(line);
        }
    }
    // an unterminated block runs to the end of the reply
    if let Some(lines) = current {
        blocks.push(lines.join("\n"));
    }
    let fenced = blocks
        .into_iter()
        .filter(|b| !b.trim().is_empty())
        .collect::<Vec<_>>()
        .join("\n");
    if !fenced.trim().is_empty() {
        return Some(fenced);
    }

    let lines: Vec<&str> = raw_text.lines().collect();
    let start = lines.iter().position(|l| defines_foo(l))?;
    let tail = lines[start..]
        .iter()
        .filter(|l| !l.contains(FENCE))
        .copied()
        .collect::<Vec<_>>()
        .join("\n");
    (!tail.trim().is_empty()).then_some(tail)
}

const TYPE_WORDS: &[&str] = &[
    "int", "void", "char", "long", "short", "unsigned", "signed", "double", "float", "size_t",
    "bool", "_Bool",
];

fn is_ident_byte(b: u8) -> bool {
    b == b'_' || b.is_ascii_alphanumeric()
}

/// `<type words and stars> foo (` at the start of a line.
fn defines_foo(line: &str) -> bool {
    let t = line.trim_start();
    let bytes = t.as_bytes();
    let mut from = 0;
    while let Some(off) = t[from..].find("foo") {
        let at = from + off;
        let end = at + 3;
        from = end;
        if at > 0 && is_ident_byte(bytes[at - 1]) {
            continue;
        }
        if bytes.get(end).is_some_and(|b| is_ident_byte(*b)) {
            continue;
        }
        if !t[end..].trim_start().starts_with('(') {
            continue;
        }
        let head = t[..at].trim_end();
        let plausible = !head.is_empty()
            && head
                .bytes()
                .all(|b| is_ident_byte(b) || b == b' ' || b == b'\t' || b == b'*')
            && head.bytes().next().is_some_and(|b| b.is_ascii_alphabetic() || b == b'_')
            && head
                .split(|c: char| c.is_whitespace() || c == '*')
                .rfind(|w| !w.is_empty())
                .is_some_and(|w| TYPE_WORDS.contains(&w));
        if plausible {
            return true;
        }
    }
    false
}
