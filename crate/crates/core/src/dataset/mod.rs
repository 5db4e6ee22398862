//! Corpus rows, persistence, splitting, statistics and training export.

mod export;
mod import;
mod io;
mod split;
mod stats;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::generate::{ClueStatus, ClueSet, CLUE_COUNT};
use crate::ingest::{PageRecord, DEFAULT_CATEGORIES};
use crate::screen::{keyword_ok, ScreenConfig, ScreenDecision};
use crate::text::word_count;

pub use export::{export_corpus, export_instruction_format, TrainingRecord};
pub use import::{import_published, ColumnMapping, ImportReport};
pub use io::{append_jsonl, read_jsonl, write_jsonl};
pub use split::{split, truncate_training, SplitResult};
pub use stats::{share_contexts_within, share_keywords_within, stats, BucketHistogram, DatasetStats, StatsConfig};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("test size {test_size} exceeds corpus size {corpus_size}")]
    TestTooLarge { test_size: usize, corpus_size: usize },
    #[error("fraction {0} outside (0, 1]")]
    InvalidFraction(f64),
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("prompt: {0}")]
    Prompt(#[from] crate::prompt::PromptError),
}

/// One dataset row: a context, its keyword and category, and three clues.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClueInstructExample {
    pub id: String,
    pub context: String,
    pub keyword: String,
    pub category: String,
    pub clues: Vec<String>,
    pub source_url: String,
}

/// Stable row id: a content hash of the source URL and keyword.
pub fn example_id(url: &str, keyword: &str) -> String {
    let mut h = Sha256::new();
    h.update(url.as_bytes());
    h.update([0u8]);
    h.update(keyword.as_bytes());
    hex::encode(&h.finalize()[..8])
}

/// The rules a row must satisfy to enter the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct ExampleRules {
    pub screen: ScreenConfig,
    pub categories: Vec<String>,
}

impl Default for ExampleRules {
    fn default() -> Self {
        ExampleRules {
            screen: ScreenConfig::default(),
            categories: DEFAULT_CATEGORIES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl ExampleRules {
    pub fn check(&self, ex: &ClueInstructExample) -> Result<(), DatasetError> {
        let fail = |m: String| Err(DatasetError::InvariantViolation(m));
        if !keyword_ok(&ex.keyword, &self.screen).0 {
            return fail(format!("keyword {:?} fails keyword rules", ex.keyword));
        }
        let words = word_count(&ex.context);
        if words < self.screen.min_context_words || words > self.screen.max_context_words {
            return fail(format!("context word count {words} outside screen bounds"));
        }
        if ex.clues.len() != CLUE_COUNT {
            return fail(format!("expected {CLUE_COUNT} clues, found {}", ex.clues.len()));
        }
        if ex.clues.iter().any(|c| c.trim().is_empty()) {
            return fail("empty clue".into());
        }
        if !self.categories.iter().any(|c| c == &ex.category) {
            return fail(format!("category {:?} not configured", ex.category));
        }
        Ok(())
    }
}

pub fn build_example(
    page: &PageRecord,
    decision: &ScreenDecision,
    clues: &ClueSet,
    rules: &ExampleRules,
) -> Result<ClueInstructExample, DatasetError> {
    if !decision.accepted {
        return Err(DatasetError::InvariantViolation("screen decision is not accepted".into()));
    }
    let keyword = decision
        .kept_keyword
        .clone()
        .ok_or_else(|| DatasetError::InvariantViolation("accepted decision without keyword".into()))?;
    if clues.status != ClueStatus::Valid {
        return Err(DatasetError::InvariantViolation(format!("clue status is {:?}, not Valid", clues.status)));
    }
    let id_source = if page.url.is_empty() { &page.title } else { &page.url };
    let ex = ClueInstructExample {
        id: example_id(id_source, &keyword),
        context: page.lead_text.clone(),
        keyword,
        category: page.category.clone(),
        clues: clues.clues.clone(),
        source_url: page.url.clone(),
    };
    rules.check(&ex)?;
    Ok(ex)
}

/// Per-build record of what was produced from what.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub config_hash: String,
    pub tool_version: String,
    pub counts: BTreeMap<String, u64>,
}

impl Manifest {
    pub fn new<C: Serialize>(seed: u64, config: &C) -> Self {
        Manifest {
            seed,
            config_hash: config_hash(config),
            tool_version: crate::VERSION.to_string(),
            counts: BTreeMap::new(),
        }
    }

    pub fn count(mut self, key: &str, value: usize) -> Self {
        self.counts.insert(key.to_string(), value as u64);
        self
    }
}

/// SHA-256 over the JSON serialization of `config`.
pub fn config_hash<C: Serialize>(config: &C) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}
