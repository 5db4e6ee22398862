use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ClueInstructExample;
use crate::screen::keyword_letter_count;
use crate::text::word_count;

/// Counts of values per bucket. `edges` are ascending lower bounds; a value
/// falls in the last bucket whose edge does not exceed it, and values below
/// the first edge fall in the first bucket.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketHistogram {
    pub edges: Vec<usize>,
    pub counts: Vec<usize>,
}

impl BucketHistogram {
    pub fn new(edges: Vec<usize>) -> Self {
        assert!(!edges.is_empty(), "histogram needs at least one edge");
        let counts = vec![0; edges.len()];
        BucketHistogram { edges, counts }
    }

    /// Edges `0, step, 2*step, ..` up to and including `max`.
    pub fn uniform(step: usize, max: usize) -> Self {
        Self::new((0..=max).step_by(step.max(1)).collect())
    }

    pub fn add(&mut self, v: usize) {
        let idx = self.edges.partition_point(|&e| e <= v).saturating_sub(1);
        self.counts[idx] += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsConfig {
    pub context_step: usize,
    pub context_max: usize,
    pub output_step: usize,
    pub output_max: usize,
    pub keyword_max: usize,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            context_step: 50,
            context_max: 1000,
            output_step: 5,
            output_max: 100,
            keyword_max: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub n_examples: usize,
    pub n_clues: usize,
    pub n_categories: usize,
    pub per_category: BTreeMap<String, usize>,
    /// Words per context.
    pub context_words: BucketHistogram,
    /// Words per example output, all clues together.
    pub output_words: BucketHistogram,
    /// Letters per keyword.
    pub keyword_letters: BucketHistogram,
}

pub fn stats(corpus: &[ClueInstructExample], cfg: &StatsConfig) -> DatasetStats {
    let mut per_category = BTreeMap::new();
    let mut context_words = BucketHistogram::uniform(cfg.context_step, cfg.context_max);
    let mut output_words = BucketHistogram::uniform(cfg.output_step, cfg.output_max);
    let mut keyword_letters = BucketHistogram::uniform(1, cfg.keyword_max);
    let mut n_clues = 0;
    for ex in corpus {
        *per_category.entry(ex.category.clone()).or_insert(0) += 1;
        n_clues += ex.clues.len();
        context_words.add(word_count(&ex.context));
        output_words.add(ex.clues.iter().map(|c| word_count(c)).sum());
        keyword_letters.add(keyword_letter_count(&ex.keyword));
    }
    DatasetStats {
        n_examples: corpus.len(),
        n_clues,
        n_categories: per_category.len(),
        per_category,
        context_words,
        output_words,
        keyword_letters,
    }
}

fn share<F: Fn(&ClueInstructExample) -> bool>(corpus: &[ClueInstructExample], f: F) -> f64 {
    if corpus.is_empty() {
        return 0.0;
    }
    corpus.iter().filter(|e| f(e)).count() as f64 / corpus.len() as f64
}

/// Fraction of keywords whose letter count lies in `[lo, hi]`.
pub fn share_keywords_within(corpus: &[ClueInstructExample], lo: usize, hi: usize) -> f64 {
    share(corpus, |e| (lo..=hi).contains(&keyword_letter_count(&e.keyword)))
}

/// Fraction of contexts whose word count lies in `[lo, hi]`.
pub fn share_contexts_within(corpus: &[ClueInstructExample], lo: usize, hi: usize) -> f64 {
    share(corpus, |e| (lo..=hi).contains(&word_count(&e.context)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::test_support::example;

    #[test]
    fn histogram_bucketing() {
        let mut h = BucketHistogram::uniform(10, 30);
        assert_eq!(h.edges, [0, 10, 20, 30]);
        for v in [0, 9, 10, 29, 30, 500] {
            h.add(v);
        }
        assert_eq!(h.counts, [2, 1, 1, 2]);
        let mut h = BucketHistogram::new(vec![5, 10]);
        h.add(1);
        assert_eq!(h.counts, [1, 0]);
    }

    #[test]
    fn corpus_counts() {
        let corpus: Vec<_> = (0..10).map(|i| example(i, if i < 7 { "Science" } else { "Games" })).collect();
        let s = stats(&corpus, &StatsConfig::default());
        assert_eq!((s.n_examples, s.n_clues, s.n_categories), (10, 30, 2));
        assert_eq!(s.per_category["Science"], 7);
        assert_eq!(s.context_words.total(), 10);
        // 43 words per context
        assert_eq!(s.context_words.counts[0], 10);
        // "Keyword" has 7 letters
        assert_eq!(s.keyword_letters.counts[7], 10);
        assert_eq!(share_keywords_within(&corpus, 3, 20), 1.0);
        assert_eq!(share_contexts_within(&corpus, 44, 1000), 0.0);
        assert_eq!(share_contexts_within(&[], 0, 1), 0.0);
    }
}
