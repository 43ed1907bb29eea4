//! Case-sensitive glob patterns where `*` matches any run of characters.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Glob {
    pattern: String,
}

impl Glob {
    pub fn new(pattern: impl Into<String>) -> Self {
        Glob {
            pattern: pattern.into(),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.pattern
    }

    pub fn matches(&self, text: &str) -> bool {
        let mut parts = self.pattern.split('*');
        let first = parts.next().unwrap_or("");
        let Some(mut rest) = text.strip_prefix(first) else {
            return false;
        };
        let parts: Vec<&str> = parts.collect();
        let Some((last, middle)) = parts.split_last() else {
            // No wildcard at all.
            return rest.is_empty();
        };
        for part in middle {
            match rest.find(part) {
                Some(idx) => rest = &rest[idx + part.len()..],
                None => return false,
            }
        }
        rest.len() >= last.len() && rest.ends_with(last)
    }
}

impl fmt::Display for Glob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pattern)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn literal_patterns() {
        assert!(Glob::new("malloc").matches("malloc"));
        assert!(!Glob::new("malloc").matches("xmalloc"));
        assert!(!Glob::new("Malloc").matches("malloc"));
    }

    #[test]
    fn wildcards() {
        assert!(Glob::new("*").matches(""));
        assert!(Glob::new("gt*").matches("gtTileContig"));
        assert!(!Glob::new("gt*").matches("getTile"));
        assert!(Glob::new("*path*").matches("/usr/path/x"));
        assert!(Glob::new("a*b*c").matches("abc"));
        assert!(Glob::new("a*b*c").matches("axxbyyc"));
        assert!(!Glob::new("a*b*c").matches("axxcyyb"));
        assert!(Glob::new("*.c").matches("vuln.c"));
        assert!(!Glob::new("ab*ba").matches("aba"));
    }

    /// Reference matcher by dynamic programming.
    fn dp_match(p: &[u8], t: &[u8]) -> bool {
        let mut m = vec![vec![false; t.len() + 1]; p.len() + 1];
        m[0][0] = true;
        for i in 1..=p.len() {
            m[i][0] = m[i - 1][0] && p[i - 1] == b'*';
            for j in 1..=t.len() {
                m[i][j] = if p[i - 1] == b'*' {
                    m[i - 1][j] || m[i][j - 1]
                } else {
                    m[i - 1][j - 1] && p[i - 1] == t[j - 1]
                };
            }
        }
        m[p.len()][t.len()]
    }

    proptest! {
        #[test]
        fn agrees_with_dp(p in "[ab*]{0,6}", t in "[ab]{0,8}") {
            prop_assert_eq!(Glob::new(p.clone()).matches(&t), dp_match(p.as_bytes(), t.as_bytes()));
        }
    }
}
