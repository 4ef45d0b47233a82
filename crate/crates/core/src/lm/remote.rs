//! Chat-completion transport.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde_json::{json, Value};

use super::{LmConfig, LmError, PromptRequest};

/// Attempts after the first failed one.
pub const MAX_RETRIES: usize = 2;

pub struct RemoteClient {
    agent: ureq::Agent,
}

/// JSON body of a chat-completion request. Temperature is always zero.
pub fn request_body(request: &PromptRequest, config: &LmConfig) -> Value {
    json!({
        "model": config.model_name,
        "temperature": 0.0,
        "max_tokens": request.reserved_response_tokens,
        "messages": [
            {"role": "system", "content": request.instruction},
            {"role": "user", "content": request.body()},
        ],
    })
}

fn response_text(body: &Value) -> Result<String, LmError> {
    body.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| LmError::TransportFailure("response has no choices[0].message.content".into()))
}

impl RemoteClient {
    pub fn new(config: &LmConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(true)
            .build()
            .into();
        Self { agent }
    }

    fn attempt(&self, body: &Value, config: &LmConfig) -> Result<String, LmError> {
        let mut call = self.agent.post(&config.endpoint).header("Content-Type", "application/json");
        if let Some(key) = &config.api_key {
            call = call.header("Authorization", format!("Bearer {key}"));
        }
        let mut response = call
            .send_json(body)
            .map_err(|e| LmError::TransportFailure(e.to_string()))?;
        let parsed: Value = response
            .body_mut()
            .read_json()
            .map_err(|e| LmError::TransportFailure(e.to_string()))?;
        response_text(&parsed)
    }

    /// Up to `1 + MAX_RETRIES` attempts; each one increments `attempts`.
    pub fn complete(&self, request: &PromptRequest, config: &LmConfig, attempts: &AtomicUsize) -> Result<String, LmError> {
        let body = request_body(request, config);
        let mut last = None;
        for attempt in 0..=MAX_RETRIES {
            attempts.fetch_add(1, Ordering::SeqCst);
            match self.attempt(&body, config) {
                Ok(text) => return Ok(text),
                Err(e) => {
                    tracing::warn!(attempt, error = %e, "language model request failed");
                    last = Some(e);
                }
            }
        }
        Err(last.expect("at least one attempt"))
    }
}
