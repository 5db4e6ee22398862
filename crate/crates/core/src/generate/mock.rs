//! Test doubles for the chat model.
//!
//! [`ScriptedBackend`] replays fixed replies. [`SyntheticBackend`] invents
//! context-grounded replies and injects malformed or answer-leaking ones at
//! configured rates; its choices are a pure function of
//! `(seed, prompt, attempt number)` so runs are reproducible under any
//! scheduling. The HTTP mock server reuses [`synthetic_reply`].

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use super::{leak_check, BackendError, ChatBackend, CluePayload, GenParams};
use crate::metrics::split_sentences;

pub struct ScriptedBackend {
    replies: Vec<String>,
    next: AtomicUsize,
}

impl ScriptedBackend {
    /// Replies are served in order; the last one repeats forever.
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let replies: Vec<String> = replies.into_iter().map(Into::into).collect();
        assert!(!replies.is_empty(), "scripted backend needs at least one reply");
        ScriptedBackend {
            replies,
            next: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.next.load(Ordering::SeqCst)
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, _prompt: &str, _params: &GenParams) -> Result<String, BackendError> {
        let i = self.next.fetch_add(1, Ordering::SeqCst);
        Ok(self.replies[i.min(self.replies.len() - 1)].clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultRates {
    pub malformed: f64,
    pub leak: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplyKind {
    Valid,
    Malformed,
    Leaking,
}

fn unit_draw(seed: u64, prompt: &str, attempt: u32) -> f64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(attempt.to_le_bytes());
    h.update(prompt.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    (u64::from_le_bytes(bytes) >> 11) as f64 / (1u64 << 53) as f64
}

pub fn reply_kind(seed: u64, prompt: &str, attempt: u32, rates: FaultRates) -> ReplyKind {
    let u = unit_draw(seed, prompt, attempt);
    if u < rates.malformed {
        ReplyKind::Malformed
    } else if u < rates.malformed + rates.leak {
        ReplyKind::Leaking
    } else {
        ReplyKind::Valid
    }
}

fn labelled_line<'a>(prompt: &'a str, label: &str) -> Option<&'a str> {
    prompt
        .lines()
        .rev()
        .find_map(|l| l.strip_prefix(label))
        .map(str::trim)
        .filter(|s| !s.is_empty())
}

fn prompt_context(prompt: &str) -> &str {
    match prompt.find("Context:\n") {
        Some(i) => {
            let rest = &prompt[i + "Context:\n".len()..];
            rest.split("\n\n").next().unwrap_or(rest)
        }
        None => prompt,
    }
}

/// Three leak-free clues cut from the context sentences.
fn grounded_clues(context: &str, keyword: &str, category: &str) -> Vec<String> {
    let mut clues: Vec<String> = split_sentences(context)
        .iter()
        .map(|s| {
            s.split_whitespace()
                .filter(|w| !leak_check(w, keyword))
                .take(12)
                .collect::<Vec<_>>()
                .join(" ")
        })
        .filter(|c| !c.is_empty() && !leak_check(c, keyword))
        .take(3)
        .collect();
    let fillers = [
        format!("Topic from the {category} section"),
        "Subject of the passage".to_string(),
        "Described in the opening paragraph".to_string(),
    ];
    for f in fillers {
        if clues.len() == 3 {
            break;
        }
        if leak_check(&f, keyword) {
            clues.push(format!("Mystery entry number {}", clues.len() + 1));
        } else {
            clues.push(f);
        }
    }
    clues
}

/// Deterministic reply for `prompt` on its `attempt`-th try (1-based).
pub fn synthetic_reply(seed: u64, prompt: &str, attempt: u32, rates: FaultRates) -> String {
    let keyword = labelled_line(prompt, "Answer:").unwrap_or("answer");
    let category = labelled_line(prompt, "Category:").unwrap_or("general");
    let clues = grounded_clues(prompt_context(prompt), keyword, category);
    match reply_kind(seed, prompt, attempt, rates) {
        ReplyKind::Valid => format!("Here are the clues: {}", CluePayload { clues }.to_json()),
        ReplyKind::Leaking => {
            let mut clues = clues;
            clues[0] = format!("Also known as {keyword}");
            CluePayload { clues }.to_json()
        }
        ReplyKind::Malformed => match (unit_draw(seed ^ 0x5eed, prompt, attempt) * 3.0) as u32 {
            0 => "I'm sorry, but I can't produce crossword clues for this text.".to_string(),
            1 => CluePayload {
                clues: clues.into_iter().take(1).collect(),
            }
            .to_json(),
            _ => format!("{{\"clues\": [\"{}\", ", clues[0].replace('"', "'")),
        },
    }
}

/// In-process synthetic model with per-prompt attempt counters.
pub struct SyntheticBackend {
    seed: u64,
    rates: FaultRates,
    attempts: Mutex<HashMap<String, u32>>,
}

impl SyntheticBackend {
    pub fn new(seed: u64, malformed_rate: f64, leak_rate: f64) -> Self {
        SyntheticBackend {
            seed,
            rates: FaultRates {
                malformed: malformed_rate,
                leak: leak_rate,
            },
            attempts: Mutex::new(HashMap::new()),
        }
    }
}

impl ChatBackend for SyntheticBackend {
    fn complete(&self, prompt: &str, _params: &GenParams) -> Result<String, BackendError> {
        let attempt = {
            let mut map = self.attempts.lock().expect("attempt map poisoned");
            let n = map.entry(prompt.to_string()).or_insert(0);
            *n += 1;
            *n
        };
        Ok(synthetic_reply(self.seed, prompt, attempt, self.rates))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{classify_response, ClueStatus};
    use crate::prompt::PromptTemplate;

    fn prompt(keyword: &str) -> String {
        PromptTemplate::default()
            .render(
                &format!("{keyword} is an automated phone call. It delivers a recorded message. Campaigns use the {keyword} often."),
                keyword,
                "Society",
            )
            .unwrap()
    }

    #[test]
    fn valid_replies_are_grounded_and_leak_free() {
        let rates = FaultRates { malformed: 0.0, leak: 0.0 };
        let raw = synthetic_reply(1, &prompt("Robocall"), 1, rates);
        let (status, clues) = classify_response(&raw, "Robocall", true);
        assert_eq!(status, ClueStatus::Valid);
        assert_eq!(clues[0], "is an automated phone call.");
    }

    #[test]
    fn fault_kinds_classify_as_expected() {
        let all_bad = FaultRates { malformed: 1.0, leak: 0.0 };
        let all_leak = FaultRates { malformed: 0.0, leak: 1.0 };
        for attempt in 1..20 {
            let (s, _) = classify_response(&synthetic_reply(3, &prompt("Robocall"), attempt, all_bad), "Robocall", true);
            assert_eq!(s, ClueStatus::Malformed);
            let (s, _) = classify_response(&synthetic_reply(3, &prompt("Robocall"), attempt, all_leak), "Robocall", true);
            assert_eq!(s, ClueStatus::Leaked);
        }
    }

    #[test]
    fn rates_are_respected_on_average() {
        let rates = FaultRates { malformed: 0.2, leak: 0.1 };
        let n = 4000;
        let mut counts = [0usize; 3];
        for i in 0..n {
            match reply_kind(9, &format!("prompt {i}"), 1, rates) {
                ReplyKind::Malformed => counts[0] += 1,
                ReplyKind::Leaking => counts[1] += 1,
                ReplyKind::Valid => counts[2] += 1,
            }
        }
        let frac = |c: usize| c as f64 / n as f64;
        assert!((frac(counts[0]) - 0.2).abs() < 0.03);
        assert!((frac(counts[1]) - 0.1).abs() < 0.03);
    }

    #[test]
    fn scripted_repeats_last() {
        let b = ScriptedBackend::new(["a", "b"]);
        let p = GenParams::default();
        let got: Vec<_> = (0..4).map(|_| b.complete("", &p).unwrap()).collect();
        assert_eq!(got, ["a", "b", "b", "b"]);
    }
}
