//! Local chat-completions endpoint backed by the synthetic clue writer, for
//! offline builds and tests of the HTTP client.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use eduverba_core::generate::mock::{synthetic_reply, FaultRates};
use serde_json::{json, Value};

pub const COMPLETIONS_PATH: &str = "/v1/chat/completions";

#[derive(Debug, Clone)]
pub struct MockConfig {
    pub seed: u64,
    pub rates: FaultRates,
    /// When set, requests must carry this bearer token.
    pub api_key: Option<String>,
}

struct MockState {
    cfg: MockConfig,
    attempts: Mutex<HashMap<String, u32>>,
}

async fn complete(State(st): State<Arc<MockState>>, headers: HeaderMap, Json(body): Json<Value>) -> (StatusCode, Json<Value>) {
    if let Some(key) = &st.cfg.api_key {
        let sent = headers.get("authorization").and_then(|v| v.to_str().ok());
        if sent != Some(format!("Bearer {key}").as_str()) {
            return (StatusCode::UNAUTHORIZED, Json(json!({"error": {"message": "invalid api key"}})));
        }
    }
    let Some(prompt) = body["messages"]
        .as_array()
        .and_then(|m| m.last())
        .and_then(|m| m["content"].as_str())
    else {
        return (StatusCode::BAD_REQUEST, Json(json!({"error": {"message": "no messages"}})));
    };
    let attempt = {
        let mut map = st.attempts.lock().expect("attempt map");
        let n = map.entry(prompt.to_string()).or_insert(0);
        *n += 1;
        *n
    };
    let reply = synthetic_reply(st.cfg.seed, prompt, attempt, st.cfg.rates);
    let model = body["model"].as_str().unwrap_or("mock");
    (
        StatusCode::OK,
        Json(json!({
            "object": "chat.completion",
            "model": model,
            "choices": [{"index": 0, "message": {"role": "assistant", "content": reply}, "finish_reason": "stop"}],
        })),
    )
}

pub fn router(cfg: MockConfig) -> Router {
    Router::new().route(COMPLETIONS_PATH, post(complete)).with_state(Arc::new(MockState {
        cfg,
        attempts: Mutex::new(HashMap::new()),
    }))
}
