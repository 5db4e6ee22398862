use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{rouge_l_tokens, rouge_n_tokens, tokenize, RougeScore};

/// Number of clue slots scored per example.
pub const SLOTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationScores<T = f64> {
    pub rouge1: RougeScore<T>,
    pub rouge2: RougeScore<T>,
    pub rouge_l: RougeScore<T>,
}

impl<T: Float> GenerationScores<T> {
    pub fn zero() -> Self {
        GenerationScores {
            rouge1: RougeScore::zero(),
            rouge2: RougeScore::zero(),
            rouge_l: RougeScore::zero(),
        }
    }
}

fn mean_scores<T: Float>(scores: &[RougeScore<T>], slots: usize) -> RougeScore<T> {
    let n = T::from(slots).expect("slot count as float");
    let sum = |f: fn(&RougeScore<T>) -> T| scores.iter().map(f).fold(T::zero(), |a, b| a + b) / n;
    RougeScore {
        recall: sum(|s| s.recall),
        precision: sum(|s| s.precision),
        f: sum(|s| s.f),
    }
}

/// Scores up to three hypothesis clues against the reference clues. Each
/// hypothesis clue is matched to the reference with the highest F for the
/// metric at hand; the example score is the mean over three slots with
/// missing hypothesis clues counting as zero.
pub fn eval_generation<T: Float>(hypothesis: &[String], reference: &[String]) -> GenerationScores<T> {
    let refs: Vec<Vec<String>> = reference.iter().map(|r| tokenize(r)).collect();
    type Scorer<'a, T> = &'a dyn Fn(&[String], &[String]) -> RougeScore<T>;
    let best = |scorer: Scorer<T>, hyp: &[String]| {
        refs.iter()
            .map(|r| scorer(hyp, r))
            .fold(RougeScore::zero(), |acc, s| if s.f > acc.f { s } else { acc })
    };
    let mut r1 = Vec::new();
    let mut r2 = Vec::new();
    let mut rl = Vec::new();
    for hyp in hypothesis.iter().take(SLOTS) {
        let h = tokenize(hyp);
        r1.push(best(&|a, b| rouge_n_tokens(a, b, 1), &h));
        r2.push(best(&|a, b| rouge_n_tokens(a, b, 2), &h));
        rl.push(best(&|a, b| rouge_l_tokens(a, b), &h));
    }
    GenerationScores {
        rouge1: mean_scores(&r1, SLOTS),
        rouge2: mean_scores(&r2, SLOTS),
        rouge_l: mean_scores(&rl, SLOTS),
    }
}

/// F-measures scaled to percentages and rounded to two decimals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercentTriple {
    pub rouge1: f64,
    pub rouge2: f64,
    pub rouge_l: f64,
}

fn percent(x: f64) -> f64 {
    (x * 10_000.0).round() / 100.0
}

impl PercentTriple {
    pub fn from_scores<T: Float>(s: &GenerationScores<T>) -> Self {
        let f = |x: T| percent(x.to_f64().expect("float to f64"));
        PercentTriple {
            rouge1: f(s.rouge1.f),
            rouge2: f(s.rouge2.f),
            rouge_l: f(s.rouge_l.f),
        }
    }

    pub fn display(&self) -> String {
        format!("{:.2}/{:.2}/{:.2}", self.rouge1, self.rouge2, self.rouge_l)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleScores {
    pub id: String,
    pub scores: PercentTriple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_examples: usize,
    /// Examples with a reference but no hypothesis row; scored as empty.
    pub missing_hypotheses: usize,
    pub aggregate: PercentTriple,
    /// Unrounded aggregate components in `[0, 1]`.
    pub aggregate_raw: GenerationScores<f64>,
    pub per_example: Vec<ExampleScores>,
}

/// Dataset-level scores: the mean of per-example scores.
/// `pairs` holds `(id, hypothesis clues, reference clues)`.
pub fn evaluate_corpus(pairs: &[(String, Vec<String>, Vec<String>)], missing_hypotheses: usize, workers: usize) -> EvalReport {
    let scores = crate::par::map_ordered(pairs, workers, |(_, hyp, reference)| eval_generation::<f64>(hyp, reference));
    let n = scores.len().max(1) as f64;
    let mut total = GenerationScores::<f64>::zero();
    for s in &scores {
        for (acc, x) in [
            (&mut total.rouge1, &s.rouge1),
            (&mut total.rouge2, &s.rouge2),
            (&mut total.rouge_l, &s.rouge_l),
        ] {
            acc.recall += x.recall;
            acc.precision += x.precision;
            acc.f += x.f;
        }
    }
    for acc in [&mut total.rouge1, &mut total.rouge2, &mut total.rouge_l] {
        acc.recall /= n;
        acc.precision /= n;
        acc.f /= n;
    }
    EvalReport {
        n_examples: scores.len(),
        missing_hypotheses,
        aggregate: PercentTriple::from_scores(&total),
        aggregate_raw: total,
        per_example: pairs
            .iter()
            .zip(&scores)
            .map(|((id, _, _), s)| ExampleScores {
                id: id.clone(),
                scores: PercentTriple::from_scores(s),
            })
            .collect(),
    }
}
