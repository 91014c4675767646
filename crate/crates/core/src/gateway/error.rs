use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GatewayErrorKind {
    Network,
    Timeout,
    RateLimited,
    ProviderRejected,
    MalformedResponse,
    ContextOverflow,
}

impl GatewayErrorKind {
    pub const ALL: [GatewayErrorKind; 6] = [
        GatewayErrorKind::Network,
        GatewayErrorKind::Timeout,
        GatewayErrorKind::RateLimited,
        GatewayErrorKind::ProviderRejected,
        GatewayErrorKind::MalformedResponse,
        GatewayErrorKind::ContextOverflow,
    ];

    pub fn is_retryable(self) -> bool {
        matches!(
            self,
            GatewayErrorKind::Network | GatewayErrorKind::Timeout | GatewayErrorKind::RateLimited
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GatewayErrorKind::Network => "network",
            GatewayErrorKind::Timeout => "timeout",
            GatewayErrorKind::RateLimited => "rate_limited",
            GatewayErrorKind::ProviderRejected => "provider_rejected",
            GatewayErrorKind::MalformedResponse => "malformed_response",
            GatewayErrorKind::ContextOverflow => "context_overflow",
        }
    }
}

impl fmt::Display for GatewayErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A classified provider failure. `retryable` is derived from the kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{kind}: {detail}")]
pub struct GatewayError {
    kind: GatewayErrorKind,
    detail: String,
    retryable: bool,
}

impl GatewayError {
    pub fn new(kind: GatewayErrorKind, detail: impl Into<String>) -> Self {
        Self {
            kind,
            detail: detail.into(),
            retryable: kind.is_retryable(),
        }
    }

    pub fn kind(&self) -> GatewayErrorKind {
        self.kind
    }

    pub fn detail(&self) -> &str {
        &self.detail
    }

    pub fn retryable(&self) -> bool {
        self.retryable
    }
}
