//! Text measurement shared by limit enforcement and analytics.

/// Number of Unicode scalar values in `s`.
///
/// Prompt limits are expressed in scalar values rather than bytes so that a
/// 250-character limit means the same thing for English and CJK input.
pub fn scalar_count(s: &str) -> usize {
    s.chars().count()
}

/// Truncates `s` to at most `max_bytes` bytes on a char boundary, appending a
/// marker when anything was cut.
pub fn truncate_bytes(s: &str, max_bytes: usize) -> String {
    if s.len() <= max_bytes {
        return s.to_string();
    }
    let mut end = max_bytes;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    let mut out = s[..end].to_string();
    out.push_str("\n[truncated]");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_scalars_not_bytes() {
        assert_eq!(scalar_count("abc"), 3);
        assert_eq!(scalar_count("反转字符串"), 5);
        assert_eq!("反转字符串".len(), 15);
        assert_eq!(scalar_count(""), 0);
    }

    #[test]
    fn truncation_respects_char_boundaries() {
        let s = "ab反";
        let t = truncate_bytes(s, 3);
        assert!(t.starts_with("ab"));
        assert!(t.ends_with("[truncated]"));
        assert_eq!(truncate_bytes("short", 100), "short");
    }
}
