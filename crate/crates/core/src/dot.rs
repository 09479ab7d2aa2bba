//! Small helpers shared by the Graphviz writers.

/// Escapes a label for use inside a double-quoted DOT string.
pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(ch),
        }
    }
    out
}

/// Quoted node identifier in a namespace (`t`, `p`, `a`, ...).
pub(crate) fn node_id(kind: &str, name: &str) -> String {
    format!("\"{kind}:{}\"", escape(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_quotes_and_backslashes() {
        assert_eq!(escape(r#"a "b" \ c"#), r#"a \"b\" \\ c"#);
        assert_eq!(node_id("t", "x\"y"), r#""t:x\"y""#);
    }
}
