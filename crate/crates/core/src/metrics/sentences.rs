//! Rule-based sentence splitting.
//!
//! A sentence ends at `.`, `!` or `?` (plus any closing quotes or brackets)
//! when followed by whitespace and then an uppercase letter, or by the end
//! of the text. A period does not end a sentence when the word before it is
//! a guarded abbreviation or an initialism with inner periods (`J.K.`,
//! `U.S.`). The output partitions the input: only whitespace falls between
//! consecutive sentences.

use std::collections::HashSet;
use std::ops::Range;

pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "Dr", "Mr", "Mrs", "Ms", "Prof", "St", "Sr", "Jr", "No", "Nos", "vs", "etc", "Inc", "Ltd", "Co",
    "Corp", "Mt", "Ft", "Gen", "Col", "Lt", "Sgt", "Capt", "Rev", "Hon", "Gov", "Sen", "Rep", "Jan",
    "Feb", "Aug", "Sept", "Oct", "Nov", "Dec", "Fig", "approx", "ca", "cf", "al", "Vol", "pp", "op",
];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '\u{201d}', '\u{2019}', '\u{bb}'];

#[derive(Debug, Clone)]
pub struct SentenceSplitter {
    abbreviations: HashSet<String>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        SentenceSplitter::new(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl SentenceSplitter {
    pub fn new<'a, I: IntoIterator<Item = &'a str>>(abbreviations: I) -> Self {
        SentenceSplitter {
            abbreviations: abbreviations.into_iter().map(String::from).collect(),
        }
    }

    pub fn with_abbreviation(mut self, abbr: &str) -> Self {
        self.abbreviations.insert(abbr.to_string());
        self
    }

    fn guarded(&self, text: &str, period_at: usize) -> bool {
        let start = text[..period_at]
            .char_indices()
            .rev()
            .find(|(_, c)| c.is_whitespace())
            .map_or(0, |(i, c)| i + c.len_utf8());
        let word = text[start..period_at].trim_start_matches(|c: char| !c.is_alphanumeric());
        !word.is_empty() && (self.abbreviations.contains(word) || word.contains('.'))
    }

    /// Byte ranges of the sentences of `text`, in order.
    pub fn spans(&self, text: &str) -> Vec<Range<usize>> {
        let mut spans = Vec::new();
        let mut start: Option<usize> = None;
        let mut iter = text.char_indices().peekable();
        while let Some((i, c)) = iter.next() {
            if start.is_none() {
                if c.is_whitespace() {
                    continue;
                }
                start = Some(i);
            }
            if !matches!(c, '.' | '!' | '?') {
                continue;
            }
            let mut end = i + c.len_utf8();
            while let Some(&(j, n)) = iter.peek() {
                if matches!(n, '.' | '!' | '?') || CLOSERS.contains(&n) {
                    end = j + n.len_utf8();
                    iter.next();
                } else {
                    break;
                }
            }
            let rest = &text[end..];
            let next_visible = rest.trim_start().chars().next();
            let boundary = match next_visible {
                None => true,
                Some(n) => rest.starts_with(char::is_whitespace) && n.is_uppercase(),
            };
            if boundary && !(c == '.' && self.guarded(text, i)) {
                spans.push(start.take().expect("sentence open")..end);
            }
        }
        if let Some(s) = start {
            let end = s + text[s..].trim_end().len();
            if end > s {
                spans.push(s..end);
            }
        }
        spans
    }

    pub fn split<'t>(&self, text: &'t str) -> Vec<&'t str> {
        self.spans(text).into_iter().map(|r| &text[r]).collect()
    }
}

/// Splits with the default abbreviation guard list.
pub fn split_sentences(text: &str) -> Vec<&str> {
    SentenceSplitter::default().split(text)
}
