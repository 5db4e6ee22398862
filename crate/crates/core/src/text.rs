//! Small text helpers shared by several stages.

/// Trims and collapses internal whitespace runs to a single space.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Whitespace-token word count.
pub fn word_count(s: &str) -> usize {
    s.split_whitespace().count()
}

/// Case-insensitive substring test.
pub fn contains_ci(haystack: &str, needle: &str) -> bool {
    haystack.to_lowercase().contains(&needle.to_lowercase())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapses_runs() {
        assert_eq!(normalize_whitespace("  South \t American\n tapir "), "South American tapir");
        assert_eq!(normalize_whitespace(""), "");
    }

    #[test]
    fn counts_words() {
        assert_eq!(word_count("one  two\nthree"), 3);
        assert_eq!(word_count("   "), 0);
    }
}
