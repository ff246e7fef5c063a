//! Minimal client for OpenAI-style chat completion endpoints.

use std::time::Duration;

use serde_json::{json, Value};

#[derive(Debug, Clone, thiserror::Error)]
pub enum RemoteError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("unexpected response shape: {0}")]
    Shape(String),
}

/// URL, credentials and limits for one endpoint.
#[derive(Debug, Clone)]
pub struct Endpoint {
    pub url: String,
    pub token: Option<String>,
    pub model: String,
    pub timeout: Duration,
    /// Extra attempts after a transport failure. HTTP errors are not retried.
    pub retries: u32,
}

impl Endpoint {
    pub fn new(url: impl Into<String>) -> Self {
        Endpoint {
            url: url.into(),
            token: None,
            model: "default".to_string(),
            timeout: Duration::from_secs(60),
            retries: 1,
        }
    }

    fn agent(&self) -> ureq::Agent {
        ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .http_status_as_error(false)
            .build()
            .into()
    }

    fn post(&self, body: &Value) -> Result<Value, RemoteError> {
        let agent = self.agent();
        let payload = body.to_string();
        let mut last = RemoteError::Transport("no attempt made".into());
        for _ in 0..=self.retries {
            let mut req = agent.post(&self.url).header("Content-Type", "application/json");
            if let Some(t) = &self.token {
                req = req.header("Authorization", format!("Bearer {t}"));
            }
            let mut resp = match req.send(payload.as_str()) {
                Ok(r) => r,
                Err(e) => {
                    last = RemoteError::Transport(e.to_string());
                    continue;
                }
            };
            let status = resp.status().as_u16();
            let text = resp
                .body_mut()
                .read_to_string()
                .map_err(|e| RemoteError::Transport(e.to_string()))?;
            if !(200..300).contains(&status) {
                return Err(RemoteError::Status { status, body: text });
            }
            return serde_json::from_str(&text).map_err(|e| RemoteError::Shape(e.to_string()));
        }
        Err(last)
    }

    /// Send `messages` and return the first choice's text.
    pub fn chat(&self, messages: Value) -> Result<String, RemoteError> {
        let body = json!({ "model": self.model, "messages": messages, "temperature": 0 });
        let reply = self.post(&body)?;
        message_text(&reply).ok_or_else(|| RemoteError::Shape(truncate(&reply.to_string(), 200)))
    }

    /// One short request, to fail fast before a long run.
    pub fn probe(&self) -> Result<(), RemoteError> {
        self.chat(json!([{ "role": "user", "content": "Reply with OK." }])).map(|_| ())
    }
}

/// `choices[0].message.content`, either a string or a list of text parts.
fn message_text(reply: &Value) -> Option<String> {
    let content = reply.get("choices")?.get(0)?.get("message")?.get("content")?;
    match content {
        Value::String(s) => Some(s.clone()),
        Value::Array(parts) => Some(
            parts
                .iter()
                .filter_map(|p| p.get("text").and_then(Value::as_str))
                .collect::<Vec<_>>()
                .join(""),
        ),
        _ => None,
    }
}

pub(crate) fn truncate(s: &str, max_chars: usize) -> String {
    match s.char_indices().nth(max_chars) {
        Some((i, _)) => format!("{}...", &s[..i]),
        None => s.to_string(),
    }
}
