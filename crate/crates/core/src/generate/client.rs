use serde_json::{json, Value};

use super::{BackendError, ChatBackend, GenParams, API_KEY_ENV};

/// OpenAI-style `chat/completions` client over blocking HTTP.
pub struct HttpChatBackend {
    agent: ureq::Agent,
    api_key: Option<String>,
}

impl HttpChatBackend {
    pub fn new(params: &GenParams, api_key: Option<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(params.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpChatBackend { agent, api_key }
    }

    /// Reads the key from `EDUVERBA_API_KEY`.
    pub fn from_env(params: &GenParams) -> Self {
        HttpChatBackend::new(params, std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()))
    }
}

pub(crate) fn request_body(prompt: &str, params: &GenParams) -> Value {
    let mut body = json!({
        "model": params.model_name,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": params.temperature,
        "top_p": params.top_p,
    });
    if params.send_top_k {
        body["top_k"] = json!(params.top_k);
    }
    body
}

pub(crate) fn response_text(v: &Value) -> Option<String> {
    v["choices"][0]["message"]["content"]
        .as_str()
        .map(String::from)
}

impl ChatBackend for HttpChatBackend {
    fn complete(&self, prompt: &str, params: &GenParams) -> Result<String, BackendError> {
        let mut req = self.agent.post(&params.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(request_body(prompt, params))
            .map_err(|e| BackendError::Unreachable(e.to_string()))?;
        let status = resp.status().as_u16();
        match status {
            200..=299 => {}
            401 | 403 => return Err(BackendError::Auth(format!("http {status}"))),
            _ => return Err(BackendError::Unreachable(format!("http {status}"))),
        }
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| BackendError::Unreachable(e.to_string()))?;
        // a non-JSON or shape-mismatched body counts as an empty reply
        let v: Value = serde_json::from_str(&text).unwrap_or(Value::Null);
        Ok(response_text(&v).unwrap_or_default())
    }
}
