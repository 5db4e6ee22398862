//! Quality filters over pages and keywords.
//!
//! Screening never fails: every rule that a page violates is listed in the
//! decision so rejects can be audited.

use serde::{Deserialize, Serialize};

use crate::ingest::{Importance, PageRecord};
use crate::text::word_count;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PopularityRule {
    /// views above threshold OR required importance
    #[default]
    Any,
    /// views above threshold AND required importance
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreenConfig {
    pub min_views: u64,
    pub required_importance: Importance,
    pub min_context_words: usize,
    pub max_context_words: usize,
    pub max_keyword_words: usize,
    pub min_keyword_chars: usize,
    pub max_keyword_chars: usize,
    pub popularity_rule: PopularityRule,
    /// Restrict keyword letters to ASCII instead of any Unicode letter.
    pub ascii_only: bool,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        ScreenConfig {
            min_views: 10_000,
            required_importance: Importance::Top,
            min_context_words: 30,
            max_context_words: 1000,
            max_keyword_words: 3,
            min_keyword_chars: 3,
            max_keyword_chars: 20,
            popularity_rule: PopularityRule::Any,
            ascii_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid screen config: {0}")]
pub struct ConfigError(pub String);

impl ScreenConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("min_context_words", self.min_context_words),
            ("max_context_words", self.max_context_words),
            ("max_keyword_words", self.max_keyword_words),
            ("min_keyword_chars", self.min_keyword_chars),
            ("max_keyword_chars", self.max_keyword_chars),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(ConfigError(format!("{name} must be positive")));
        }
        if self.min_context_words >= self.max_context_words {
            return Err(ConfigError("min_context_words must be below max_context_words".into()));
        }
        if self.min_keyword_chars >= self.max_keyword_chars {
            return Err(ConfigError("min_keyword_chars must be below max_keyword_chars".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RejectReason {
    LowPopularity,
    ContextTooShort,
    ContextTooLong,
    KeywordTooManyWords,
    KeywordTooShort,
    KeywordTooLong,
    KeywordNonAlphabetic,
    NoKeyword,
}

impl RejectReason {
    pub const ALL: [RejectReason; 8] = [
        RejectReason::LowPopularity,
        RejectReason::ContextTooShort,
        RejectReason::ContextTooLong,
        RejectReason::KeywordTooManyWords,
        RejectReason::KeywordTooShort,
        RejectReason::KeywordTooLong,
        RejectReason::KeywordNonAlphabetic,
        RejectReason::NoKeyword,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenDecision {
    pub accepted: bool,
    pub kept_keyword: Option<String>,
    pub reasons: Vec<RejectReason>,
}

/// Letters-only count, spaces excluded.
pub fn keyword_letter_count(keyword: &str) -> usize {
    keyword.chars().filter(|c| c.is_alphabetic()).count()
}

/// Checks one whitespace-normalized keyword against the crossword rules.
pub fn keyword_ok(keyword: &str, cfg: &ScreenConfig) -> (bool, Vec<RejectReason>) {
    let mut reasons = Vec::new();
    let words: Vec<&str> = keyword.split(' ').collect();
    if words.len() > cfg.max_keyword_words {
        reasons.push(RejectReason::KeywordTooManyWords);
    }
    let letters = keyword_letter_count(keyword);
    if letters < cfg.min_keyword_chars {
        reasons.push(RejectReason::KeywordTooShort);
    }
    if letters > cfg.max_keyword_chars {
        reasons.push(RejectReason::KeywordTooLong);
    }
    let is_letter = |c: char| {
        if cfg.ascii_only {
            c.is_ascii_alphabetic()
        } else {
            c.is_alphabetic()
        }
    };
    let bad_char = keyword.chars().any(|c| c != ' ' && !is_letter(c));
    let bad_spacing = words.iter().any(|w| w.is_empty());
    if bad_char || bad_spacing {
        reasons.push(RejectReason::KeywordNonAlphabetic);
    }
    (reasons.is_empty(), reasons)
}

fn popular(page: &PageRecord, cfg: &ScreenConfig) -> bool {
    let by_views = page.views > cfg.min_views;
    let by_importance = page.importance == cfg.required_importance;
    match cfg.popularity_rule {
        PopularityRule::Any => by_views || by_importance,
        PopularityRule::All => by_views && by_importance,
    }
}

pub fn screen_page(page: &PageRecord, cfg: &ScreenConfig) -> ScreenDecision {
    let mut reasons = Vec::new();
    if !popular(page, cfg) {
        reasons.push(RejectReason::LowPopularity);
    }
    let words = word_count(&page.lead_text);
    if words < cfg.min_context_words {
        reasons.push(RejectReason::ContextTooShort);
    }
    if words > cfg.max_context_words {
        reasons.push(RejectReason::ContextTooLong);
    }

    let mut kept_keyword = None;
    let mut keyword_reasons: Vec<RejectReason> = Vec::new();
    for kw in &page.keywords {
        let (pass, why) = keyword_ok(kw, cfg);
        if pass {
            kept_keyword = Some(kw.clone());
            break;
        }
        for r in why {
            if !keyword_reasons.contains(&r) {
                keyword_reasons.push(r);
            }
        }
    }
    if kept_keyword.is_none() {
        keyword_reasons.sort();
        reasons.extend(keyword_reasons);
        reasons.push(RejectReason::NoKeyword);
    }

    ScreenDecision {
        accepted: reasons.is_empty(),
        kept_keyword,
        reasons,
    }
}
