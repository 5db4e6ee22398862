use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{rouge_l_tokens, tokenize, MetricsError, SentenceSplitter};

/// A context pre-split into tokenized sentences, reusable across its clues.
#[derive(Debug, Clone)]
pub struct ContextSentences {
    sentences: Vec<Vec<String>>,
}

impl ContextSentences {
    pub fn new(context: &str, splitter: &SentenceSplitter) -> Result<Self, MetricsError> {
        let sentences: Vec<Vec<String>> = splitter.split(context).into_iter().map(tokenize).collect();
        if sentences.is_empty() {
            return Err(MetricsError::EmptyContext);
        }
        Ok(ContextSentences { sentences })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Best ROUGE-L F of `clue` against any sentence; ties go to the lowest
    /// sentence index.
    pub fn best_match<T: Float>(&self, clue: &str) -> (usize, T) {
        let clue_tokens = tokenize(clue);
        let mut best = (0, T::zero());
        for (i, s) in self.sentences.iter().enumerate() {
            let f = rouge_l_tokens::<T, _>(&clue_tokens, s).f;
            if f > best.1 {
                best = (i, f);
            }
        }
        best
    }
}

/// Index of the context sentence closest to `clue` and its ROUGE-L F.
pub fn context_adherence<T: Float>(clue: &str, context: &str) -> Result<(usize, T), MetricsError> {
    Ok(ContextSentences::new(context, &SentenceSplitter::default())?.best_match(clue))
}

/// Equal-width buckets over `[0, 1]`; a value of exactly 1 lands in the
/// last bucket.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub buckets: usize,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(buckets: usize) -> Self {
        let buckets = buckets.max(1);
        Histogram {
            buckets,
            counts: vec![0; buckets],
        }
    }

    pub fn add<T: Float>(&mut self, v: T) {
        let b = T::from(self.buckets).expect("bucket count as float");
        let idx = (v * b).floor().to_usize().unwrap_or(0).min(self.buckets - 1);
        self.counts[idx] += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Lower edge of each bucket.
    pub fn edges(&self) -> Vec<f64> {
        (0..self.buckets).map(|i| i as f64 / self.buckets as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClueAdherence<T = f64> {
    pub clue_id: String,
    pub best_sentence_index: usize,
    pub rouge_l_f: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdherenceReport<T = f64> {
    pub per_clue: Vec<ClueAdherence<T>>,
    pub mean: T,
    pub histogram: Histogram,
}

/// Scores every clue of every `(example id, context, clues)` item against
/// its own context. Items run in parallel; the reduction is in input order.
/// Contexts without sentences are skipped and their ids returned.
pub fn adherence_report<T, I>(items: &[I], buckets: usize, workers: usize) -> (AdherenceReport<T>, Vec<String>)
where
    T: Float + Send,
    I: AdherenceItem + Sync,
{
    let splitter = SentenceSplitter::default();
    let scored = crate::par::map_ordered(items, workers, |item| {
        ContextSentences::new(item.context(), &splitter).map(|ctx| {
            item.clues()
                .iter()
                .enumerate()
                .map(|(k, clue)| {
                    let (idx, f) = ctx.best_match::<T>(clue);
                    ClueAdherence {
                        clue_id: format!("{}#{k}", item.id()),
                        best_sentence_index: idx,
                        rouge_l_f: f,
                    }
                })
                .collect::<Vec<_>>()
        })
    });
    let mut per_clue = Vec::new();
    let mut skipped = Vec::new();
    for (item, res) in items.iter().zip(scored) {
        match res {
            Ok(v) => per_clue.extend(v),
            Err(_) => skipped.push(item.id().to_string()),
        }
    }
    let mut histogram = Histogram::new(buckets);
    let mut sum = T::zero();
    for c in &per_clue {
        histogram.add(c.rouge_l_f);
        sum = sum + c.rouge_l_f;
    }
    let mean = if per_clue.is_empty() {
        T::zero()
    } else {
        sum / T::from(per_clue.len()).expect("length as float")
    };
    (
        AdherenceReport {
            per_clue,
            mean,
            histogram,
        },
        skipped,
    )
}

/// What [`adherence_report`] needs from a corpus row.
pub trait AdherenceItem {
    fn id(&self) -> &str;
    fn context(&self) -> &str;
    fn clues(&self) -> &[String];
}

impl AdherenceItem for crate::dataset::ClueInstructExample {
    fn id(&self) -> &str {
        &self.id
    }

    fn context(&self) -> &str {
        &self.context
    }

    fn clues(&self) -> &[String] {
        &self.clues
    }
}
