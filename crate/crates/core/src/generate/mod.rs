//! Clue generation against a chat-completion model.
//!
//! [`generate_clues`] sends one prompt, parses the reply into exactly three
//! clues and validates them, retrying with the identical prompt and sampling
//! parameters until a valid set comes back or the attempt budget runs out.
//! The raw reply is always kept for audit.

mod client;
mod leak;
pub mod mock;
mod parse;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use client::HttpChatBackend;
pub use leak::{leak_check, PREFIX_MIN_LEN};
pub use parse::{parse_clues, CluePayload, ParseError, CLUE_COUNT};

/// Environment variable holding the model API key.
pub const API_KEY_ENV: &str = "EDUVERBA_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenParams {
    pub temperature: f64,
    pub top_p: f64,
    pub top_k: u32,
    /// Total attempts per prompt, first try included.
    pub max_retries: u32,
    pub endpoint: String,
    pub model_name: String,
    #[serde(with = "millis")]
    pub timeout: Duration,
    /// Send `top_k` on the wire; some hosted APIs reject it.
    pub send_top_k: bool,
    /// Treat clues containing the answer as failures.
    pub leak_filter: bool,
    pub concurrency: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            temperature: 0.1,
            top_p: 0.75,
            top_k: 50,
            max_retries: 3,
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model_name: "gpt-3.5-turbo".into(),
            timeout: Duration::from_secs(60),
            send_top_k: true,
            leak_filter: true,
            concurrency: 4,
        }
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_millis(u64::deserialize(d)?))
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenerateError> {
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(GenerateError::InvalidParams("temperature must be >= 0".into()));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(GenerateError::InvalidParams("top_p must lie in (0, 1]".into()));
        }
        if self.top_k == 0 {
            return Err(GenerateError::InvalidParams("top_k must be positive".into()));
        }
        if self.max_retries == 0 {
            return Err(GenerateError::InvalidParams("max_retries must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClueStatus {
    Valid,
    Empty,
    Malformed,
    Leaked,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClueSet {
    /// Three clues when valid or leaked; empty when nothing usable came back.
    pub clues: Vec<String>,
    pub status: ClueStatus,
    pub raw_response: String,
    pub attempts: u32,
}

impl ClueSet {
    pub fn valid(clues: Vec<String>) -> Self {
        ClueSet {
            raw_response: CluePayload { clues: clues.clone() }.to_json(),
            clues,
            status: ClueStatus::Valid,
            attempts: 1,
        }
    }

    pub fn empty() -> Self {
        ClueSet {
            clues: Vec::new(),
            status: ClueStatus::Empty,
            raw_response: String::new(),
            attempts: 0,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.status == ClueStatus::Valid
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("credentials rejected: {0}")]
    Auth(String),
    #[error("endpoint unreachable: {0}")]
    Unreachable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("endpoint unreachable after {attempts} attempts: {message}")]
    EndpointUnreachable { attempts: u32, message: String },
    #[error("authentication failure: {0}")]
    AuthFailure(String),
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
}

/// A chat model that turns one prompt into one assistant message.
pub trait ChatBackend: Sync {
    fn complete(&self, prompt: &str, params: &GenParams) -> Result<String, BackendError>;
}

impl<B: ChatBackend + ?Sized> ChatBackend for &B {
    fn complete(&self, prompt: &str, params: &GenParams) -> Result<String, BackendError> {
        (**self).complete(prompt, params)
    }
}

impl<B: ChatBackend + ?Sized + Send> ChatBackend for Box<B> {
    fn complete(&self, prompt: &str, params: &GenParams) -> Result<String, BackendError> {
        (**self).complete(prompt, params)
    }
}

/// One unit of generation work.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub prompt: String,
    pub keyword: String,
}

/// Labels a single raw reply.
pub fn classify_response(raw: &str, keyword: &str, leak_filter: bool) -> (ClueStatus, Vec<String>) {
    if raw.trim().is_empty() {
        return (ClueStatus::Empty, Vec::new());
    }
    let clues = match parse_clues(raw) {
        Ok(c) => c,
        Err(_) => return (ClueStatus::Malformed, Vec::new()),
    };
    if clues.iter().any(|c| c.is_empty()) {
        return (ClueStatus::Malformed, clues);
    }
    if leak_filter && clues.iter().any(|c| leak_check(c, keyword)) {
        return (ClueStatus::Leaked, clues);
    }
    (ClueStatus::Valid, clues)
}

pub fn generate_clues<B: ChatBackend + ?Sized>(
    request: &GenerationRequest,
    backend: &B,
    params: &GenParams,
) -> Result<ClueSet, GenerateError> {
    params.validate()?;
    let mut last: Option<ClueSet> = None;
    let mut last_transport = String::new();
    for attempt in 1..=params.max_retries {
        match backend.complete(&request.prompt, params) {
            Err(BackendError::Auth(m)) => return Err(GenerateError::AuthFailure(m)),
            Err(BackendError::Unreachable(m)) => {
                log::debug!("attempt {attempt} transport failure: {m}");
                last_transport = m;
            }
            Ok(raw) => {
                let (status, clues) = classify_response(&raw, &request.keyword, params.leak_filter);
                let set = ClueSet {
                    clues,
                    status,
                    raw_response: raw,
                    attempts: attempt,
                };
                if status == ClueStatus::Valid {
                    return Ok(set);
                }
                last = Some(set);
            }
        }
    }
    match last {
        Some(mut set) => {
            set.attempts = params.max_retries;
            Ok(set)
        }
        None => Err(GenerateError::EndpointUnreachable {
            attempts: params.max_retries,
            message: last_transport,
        }),
    }
}

/// Runs [`generate_clues`] over `requests` with up to `params.concurrency`
/// requests in flight; results keep input order.
pub fn generate_batch<B: ChatBackend + ?Sized>(
    requests: &[GenerationRequest],
    backend: &B,
    params: &GenParams,
) -> Vec<Result<ClueSet, GenerateError>> {
    crate::par::map_ordered(requests, params.concurrency, |r| generate_clues(r, backend, params))
}

#[cfg(test)]
mod tests {
    use super::mock::{ScriptedBackend, SyntheticBackend};
    use super::*;

    fn req(keyword: &str) -> GenerationRequest {
        GenerationRequest {
            prompt: format!("Answer: {keyword}\nContext:\nSomething.\n"),
            keyword: keyword.into(),
        }
    }

    #[test]
    fn defaults_match_sampling_setup() {
        let p = GenParams::default();
        assert_eq!((p.temperature, p.top_p, p.top_k), (0.1, 0.75, 50));
        assert_eq!(p.max_retries, 3);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn happy_path_single_attempt() {
        let backend = ScriptedBackend::new([r#"{"clues": ["Blocked by carriers", "Automated dialing", "Recorded message"]}"#]);
        let set = generate_clues(&req("Robocall"), &backend, &GenParams::default()).unwrap();
        assert_eq!(set.status, ClueStatus::Valid);
        assert_eq!(set.attempts, 1);
        assert_eq!(backend.calls(), 1);
    }

    #[test]
    fn prose_every_time_is_malformed() {
        let backend = ScriptedBackend::new(["Sorry, I can only talk about the weather."]);
        let params = GenParams::default();
        let set = generate_clues(&req("Robocall"), &backend, &params).unwrap();
        assert_eq!(set.status, ClueStatus::Malformed);
        assert_eq!(set.attempts, params.max_retries);
        assert_eq!(set.raw_response, "Sorry, I can only talk about the weather.");
        assert_eq!(backend.calls(), 3);
    }

    #[test]
    fn tapir_clue_leaks() {
        let raw = r#"{"clues": ["One of the four recognized species in the tapir family", "Lives in the Amazon", "Herbivore with a short trunk"]}"#;
        let backend = ScriptedBackend::new([raw]);
        let set = generate_clues(&req("South American tapir"), &backend, &GenParams::default()).unwrap();
        assert_eq!(set.status, ClueStatus::Leaked);
        assert_eq!(set.raw_response, raw);
        let no_filter = GenParams {
            leak_filter: false,
            ..GenParams::default()
        };
        let set = generate_clues(&req("South American tapir"), &ScriptedBackend::new([raw]), &no_filter).unwrap();
        assert_eq!(set.status, ClueStatus::Valid);
    }

    #[test]
    fn recovers_on_retry() {
        let backend = ScriptedBackend::new([
            r#"{"clues": ["just one"]}"#,
            "",
            r#"{"clues": ["a", "b", "c"]}"#,
        ]);
        let set = generate_clues(&req("Robocall"), &backend, &GenParams::default()).unwrap();
        assert_eq!(set.status, ClueStatus::Valid);
        assert_eq!(set.attempts, 3);
    }

    #[test]
    fn empty_reply_status() {
        let set = generate_clues(&req("Robocall"), &ScriptedBackend::new(["  "]), &GenParams::default()).unwrap();
        assert_eq!(set.status, ClueStatus::Empty);
        assert!(set.clues.is_empty());
    }

    struct Failing(BackendError);

    impl ChatBackend for Failing {
        fn complete(&self, _: &str, _: &GenParams) -> Result<String, BackendError> {
            Err(self.0.clone())
        }
    }

    #[test]
    fn transport_and_auth_errors() {
        let err = generate_clues(&req("x"), &Failing(BackendError::Unreachable("refused".into())), &GenParams::default());
        assert!(matches!(err, Err(GenerateError::EndpointUnreachable { attempts: 3, .. })));
        let err = generate_clues(&req("x"), &Failing(BackendError::Auth("401".into())), &GenParams::default());
        assert!(matches!(err, Err(GenerateError::AuthFailure(_))));
    }

    #[test]
    fn invalid_params() {
        let p = GenParams {
            top_p: 0.0,
            ..GenParams::default()
        };
        assert!(matches!(generate_clues(&req("x"), &ScriptedBackend::new(["a"]), &p), Err(GenerateError::InvalidParams(_))));
    }

    #[test]
    fn batch_preserves_order_and_validity() {
        let backend = SyntheticBackend::new(11, 0.3, 0.2);
        let requests: Vec<_> = ["Robocall", "Lovesick", "Nile", "Everest", "Tapir", "Amazon"]
            .iter()
            .map(|k| GenerationRequest {
                prompt: crate::prompt::PromptTemplate::default()
                    .render(&format!("{k} is a thing people talk about."), k, "Science")
                    .unwrap(),
                keyword: k.to_string(),
            })
            .collect();
        let params = GenParams {
            max_retries: 5,
            ..GenParams::default()
        };
        let out = generate_batch(&requests, &backend, &params);
        for (r, set) in requests.iter().zip(&out) {
            let set = set.as_ref().unwrap();
            assert!(set.attempts <= params.max_retries);
            if set.is_valid() {
                assert!(set.clues.iter().all(|c| !leak_check(c, &r.keyword)));
            }
        }
        let again = generate_batch(&requests, &SyntheticBackend::new(11, 0.3, 0.2), &params);
        assert_eq!(out, again);
    }
}
