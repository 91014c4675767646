//! Chat-completion providers behind one contract.
//!
//! [`complete_chat`] drives any [`ChatProvider`] with retries and exponential
//! backoff. [`HttpChatProvider`] speaks the widely implemented
//! chat-completions wire shape; [`ScriptedProvider`] replays fixtures for
//! tests and offline demos.

mod error;
mod http;
mod scripted;

use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

pub use error::{GatewayError, GatewayErrorKind};
pub use http::{parse_completion_body, HttpChatProvider};
pub use scripted::{GoldenConversation, GoldenTurn, ScriptedProvider, ScriptedProviderBuilder};

use crate::prompt::{PromptPlan, Role};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_backoff_ms: 500,
        }
    }
}

impl RetryPolicy {
    /// Delay before attempt `attempt + 1`, for `attempt >= 1`.
    pub fn backoff(&self, attempt: u32) -> Duration {
        let factor = 1u64 << (attempt.saturating_sub(1)).min(16);
        Duration::from_millis(self.base_backoff_ms.saturating_mul(factor))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub endpoint_url: String,
    pub model_id: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_output_tokens")]
    pub max_output_tokens: u32,
    /// Name of the environment variable holding the API key.
    pub credential_ref: String,
    #[serde(default)]
    pub retry: RetryPolicy,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_temperature() -> f64 {
    0.7
}

fn default_max_output_tokens() -> u32 {
    512
}

fn default_timeout_ms() -> u64 {
    60_000
}

/// Upper bound of the temperature range accepted by chat-completions APIs.
pub const MAX_TEMPERATURE: f64 = 2.0;

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut problems = Vec::new();
        if reqwest::Url::parse(&self.endpoint_url).is_err() {
            problems.push(format!("endpoint_url `{}` is not a URL", self.endpoint_url));
        }
        if self.model_id.trim().is_empty() {
            problems.push("model_id must not be empty".into());
        }
        if !(0.0..=MAX_TEMPERATURE).contains(&self.temperature) {
            problems.push(format!("temperature must be within 0..={MAX_TEMPERATURE}"));
        }
        if self.max_output_tokens == 0 {
            problems.push("max_output_tokens must be positive".into());
        }
        if self.retry.max_attempts == 0 {
            problems.push("retry.max_attempts must be at least 1".into());
        }
        if self.credential_ref.trim().is_empty() {
            problems.push("credential_ref must name an environment variable".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: Role,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f64,
    max_tokens: u32,
    stream: bool,
}

/// The exact request body sent for `plan`; byte-stable for equal inputs.
pub fn request_body(plan: &PromptPlan, config: &ProviderConfig) -> String {
    let body = WireRequest {
        model: &config.model_id,
        messages: plan
            .messages()
            .iter()
            .map(|m| WireMessage {
                role: m.role(),
                content: m.content(),
            })
            .collect(),
        temperature: config.temperature,
        max_tokens: config.max_output_tokens,
        stream: false,
    };
    serde_json::to_string(&body).expect("request body always serializes")
}

#[async_trait]
pub trait ChatProvider: Send + Sync {
    /// One attempt: the assistant content verbatim, or a classified error.
    async fn complete(&self, plan: &PromptPlan, config: &ProviderConfig)
        -> Result<String, GatewayError>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub content: String,
    /// Provider calls made, including the successful one.
    pub attempts: u32,
}

/// Calls `provider`, retrying retryable errors up to
/// `config.retry.max_attempts` calls in total.
pub async fn complete_chat(
    provider: &dyn ChatProvider,
    plan: &PromptPlan,
    config: &ProviderConfig,
) -> Result<Completion, GatewayError> {
    let max_attempts = config.retry.max_attempts.max(1);
    let mut attempt = 1;
    loop {
        match provider.complete(plan, config).await {
            Ok(content) => {
                return Ok(Completion {
                    content,
                    attempts: attempt,
                })
            }
            Err(err) if err.retryable() && attempt < max_attempts => {
                let delay = config.retry.backoff(attempt);
                tracing::warn!(attempt, kind = %err.kind(), ?delay, "retrying chat completion");
                tokio::time::sleep(delay).await;
                attempt += 1;
            }
            Err(err) => return Err(err),
        }
    }
}
