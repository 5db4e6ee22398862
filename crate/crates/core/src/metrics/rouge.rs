use std::collections::HashMap;
use std::hash::Hash;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{lcs_length, tokenize};

/// Recall, precision and balanced F of one (candidate, reference) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore<T = f64> {
    pub recall: T,
    pub precision: T,
    pub f: T,
}

impl<T: Float> Default for RougeScore<T> {
    fn default() -> Self {
        RougeScore::zero()
    }
}

fn cast<T: Float>(n: usize) -> T {
    T::from(n).expect("count representable as float")
}

impl<T: Float> RougeScore<T> {
    pub fn zero() -> Self {
        RougeScore {
            recall: T::zero(),
            precision: T::zero(),
            f: T::zero(),
        }
    }

    /// Balanced F from recall and precision; 0 when both are 0.
    pub fn from_recall_precision(recall: T, precision: T) -> Self {
        let sum = recall + precision;
        let f = if sum > T::zero() {
            (T::one() + T::one()) * recall * precision / sum
        } else {
            T::zero()
        };
        RougeScore { recall, precision, f }
    }

    /// Scores from an overlap count and the two sequence sizes. Empty sides
    /// contribute zero components.
    pub fn from_counts(overlap: usize, candidate_len: usize, reference_len: usize) -> Self {
        let ratio = |den: usize| {
            if den == 0 {
                T::zero()
            } else {
                cast::<T>(overlap) / cast::<T>(den)
            }
        };
        RougeScore::from_recall_precision(ratio(reference_len), ratio(candidate_len))
    }

    pub fn cast<U: Float>(self) -> RougeScore<U> {
        let c = |x: T| U::from(x).expect("float to float cast");
        RougeScore {
            recall: c(self.recall),
            precision: c(self.precision),
            f: c(self.f),
        }
    }
}

fn ngram_counts<S: Eq + Hash>(tokens: &[S], n: usize) -> HashMap<&[S], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped n-gram overlap over pre-tokenized input.
pub fn rouge_n_tokens<T: Float, S: Eq + Hash>(candidate: &[S], reference: &[S], n: usize) -> RougeScore<T> {
    assert!(n >= 1, "n-gram order must be positive");
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let overlap = cand
        .iter()
        .map(|(g, c)| (*c).min(refs.get(g).copied().unwrap_or(0)))
        .sum();
    let grams = |len: usize| if len >= n { len - n + 1 } else { 0 };
    RougeScore::from_counts(overlap, grams(candidate.len()), grams(reference.len()))
}

pub fn rouge_n<T: Float>(candidate: &str, reference: &str, n: usize) -> RougeScore<T> {
    rouge_n_tokens(&tokenize(candidate), &tokenize(reference), n)
}

pub fn rouge_l_tokens<T: Float, S: PartialEq>(candidate: &[S], reference: &[S]) -> RougeScore<T> {
    RougeScore::from_counts(lcs_length(candidate, reference), candidate.len(), reference.len())
}

pub fn rouge_l<T: Float>(candidate: &str, reference: &str) -> RougeScore<T> {
    rouge_l_tokens(&tokenize(candidate), &tokenize(reference))
}
