//! ROUGE-1/2/L, sentence splitting, context adherence and the generation
//! evaluation harness.
//!
//! Scores are generic over [`num_traits::Float`]; see the crate-root
//! aliases for the `f64`/`f32` instantiations. All components live in
//! `[0, 1]`; scaling to percentages happens only in report types.

mod adherence;
mod eval;
mod lcs;
mod rouge;
mod sentences;

pub use adherence::{adherence_report, context_adherence, AdherenceItem, AdherenceReport, ClueAdherence, ContextSentences, Histogram};
pub use eval::{eval_generation, evaluate_corpus, EvalReport, ExampleScores, GenerationScores, PercentTriple};
pub use lcs::lcs_length;
pub use rouge::{rouge_l, rouge_l_tokens, rouge_n, rouge_n_tokens, RougeScore};
pub use sentences::{split_sentences, SentenceSplitter, DEFAULT_ABBREVIATIONS};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("context has no sentences")]
    EmptyContext,
}

/// Lowercased alphanumeric runs; everything else separates tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}
