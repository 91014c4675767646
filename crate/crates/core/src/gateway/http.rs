use std::fmt;
use std::time::Duration;

use async_trait::async_trait;
use serde_json::Value;

use super::{request_body, ChatProvider, GatewayError, GatewayErrorKind, ProviderConfig};
use crate::prompt::PromptPlan;

/// Client for any endpoint speaking the chat-completions request/response
/// shape.
pub struct HttpChatProvider {
    client: reqwest::Client,
    api_key: Option<String>,
}

impl fmt::Debug for HttpChatProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpChatProvider")
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl HttpChatProvider {
    /// Reads the API key from the environment variable named by
    /// `config.credential_ref`; a missing variable sends no auth header.
    pub fn from_config(config: &ProviderConfig) -> Result<Self, GatewayError> {
        let api_key = std::env::var(&config.credential_ref).ok().filter(|k| !k.is_empty());
        Self::new(config, api_key)
    }

    pub fn new(config: &ProviderConfig, api_key: Option<String>) -> Result<Self, GatewayError> {
        let client = reqwest::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| GatewayError::new(GatewayErrorKind::Network, e.to_string()))?;
        Ok(Self { client, api_key })
    }
}

fn classify_transport(err: &reqwest::Error) -> GatewayError {
    let kind = if err.is_timeout() {
        GatewayErrorKind::Timeout
    } else {
        GatewayErrorKind::Network
    };
    GatewayError::new(kind, err.to_string())
}

fn is_context_overflow(body: &str) -> bool {
    let code = serde_json::from_str::<Value>(body)
        .ok()
        .and_then(|v| v.pointer("/error/code").and_then(Value::as_str).map(str::to_owned));
    code.as_deref() == Some("context_length_exceeded")
        || body.contains("maximum context length")
}

fn classify_status(status: u16, body: &str) -> GatewayError {
    let detail = format!("HTTP {status}: {}", truncate(body, 300));
    let kind = match status {
        429 => GatewayErrorKind::RateLimited,
        408 | 504 => GatewayErrorKind::Timeout,
        413 => GatewayErrorKind::ContextOverflow,
        500..=599 => GatewayErrorKind::Network,
        _ if is_context_overflow(body) => GatewayErrorKind::ContextOverflow,
        _ => GatewayErrorKind::ProviderRejected,
    };
    GatewayError::new(kind, detail)
}

fn truncate(text: &str, max: usize) -> &str {
    match text.char_indices().nth(max) {
        Some((i, _)) => &text[..i],
        None => text,
    }
}

/// Extracts `choices[0].message.content` from a response body.
pub fn parse_completion_body(body: &str) -> Result<String, GatewayError> {
    let malformed = |why: &str| GatewayError::new(GatewayErrorKind::MalformedResponse, why.to_string());
    let value: Value = serde_json::from_str(body).map_err(|e| malformed(&format!("invalid JSON: {e}")))?;
    value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .filter(|s| !s.trim().is_empty())
        .map(str::to_owned)
        .ok_or_else(|| malformed("missing choices[0].message.content"))
}

#[async_trait]
impl ChatProvider for HttpChatProvider {
    async fn complete(&self, plan: &PromptPlan, config: &ProviderConfig) -> Result<String, GatewayError> {
        let mut request = self
            .client
            .post(&config.endpoint_url)
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(request_body(plan, config));
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().await.map_err(|e| classify_transport(&e))?;
        let status = response.status().as_u16();
        let body = response.text().await.map_err(|e| classify_transport(&e))?;
        if !(200..300).contains(&status) {
            return Err(classify_status(status, &body));
        }
        parse_completion_body(&body)
    }
}
