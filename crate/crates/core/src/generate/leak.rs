/// Keyword words at least this long match clue words by prefix; shorter
/// ones need an exact word match.
pub const PREFIX_MIN_LEN: usize = 4;

fn words(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// True when `clue` gives the answer away: the whole keyword appears as a
/// substring, or any keyword word appears as a clue word (by prefix for
/// words of [`PREFIX_MIN_LEN`] letters or more, so "tapir" catches "tapirs").
pub fn leak_check(clue: &str, keyword: &str) -> bool {
    let clue_lower = clue.to_lowercase();
    let keyword_lower = keyword.trim().to_lowercase();
    if !keyword_lower.is_empty() && clue_lower.contains(&keyword_lower) {
        return true;
    }
    let clue_words = words(&clue_lower);
    words(&keyword_lower).iter().any(|kw| {
        if kw.chars().count() >= PREFIX_MIN_LEN {
            clue_words.iter().any(|cw| cw.starts_with(kw.as_str()))
        } else {
            clue_words.iter().any(|cw| cw == kw)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_overlap() {
        assert!(!leak_check("Automated phone call", "Robocall"));
    }

    #[test]
    fn variant_word_leaks() {
        assert!(leak_check("One of the four recognized species in the tapir family", "South American tapir"));
        assert!(leak_check("A robocaller's tool", "Robocall"));
        assert!(leak_check("Native to several TAPIRS habitats", "tapir"));
    }

    #[test]
    fn short_words_need_exact_match() {
        // "of" would otherwise fire on "often"
        assert!(!leak_check("Often corrupt government in a wizarding world", "Ministry Of Magic"));
        assert!(leak_check("Department of wizards", "Ministry Of Magic"));
        assert!(!leak_check("Corrupt and incompetent government in J.K. Rowling's Wizarding World", "Ministry Of Magic"));
    }

    #[test]
    fn full_substring() {
        assert!(leak_check("Gun-toting lawman", "Gun"));
        assert!(leak_check("importantly", "ant"));
    }

    #[test]
    fn prefix_only_not_infix() {
        assert!(!leak_check("A multitapir creature", "South American tapir"));
    }
}
