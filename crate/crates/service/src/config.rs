use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vpsim_core::affect::AffectProviderConfig;
use vpsim_core::gateway::ProviderConfig;
use vpsim_core::Locale;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

fn default_bind() -> String {
    "127.0.0.1:8080".into()
}

fn default_locales() -> Vec<Locale> {
    Locale::ALL.to_vec()
}

fn default_admin_token_ref() -> String {
    "VPSIM_ADMIN_TOKEN".into()
}

/// Where replies come from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderMode {
    /// The configured chat-completions endpoint.
    #[default]
    Http,
    /// Replays the `reply` fields of a golden conversation file, by turn.
    Scripted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApiConfig {
    #[serde(default = "default_bind")]
    pub bind_address: String,
    pub storage_path: PathBuf,
    #[serde(default = "default_locales")]
    pub locales: Vec<Locale>,
    /// Environment variable holding the admin bearer token.
    #[serde(default = "default_admin_token_ref")]
    pub admin_token_ref: String,
    #[serde(default)]
    pub assignment_seed: u64,
    #[serde(default)]
    pub provider_mode: ProviderMode,
    /// Golden conversation used when `provider_mode = "scripted"`.
    #[serde(default)]
    pub scripted_replies: Option<PathBuf>,
    pub provider: ProviderConfig,
    #[serde(default)]
    pub affect_provider: AffectProviderConfig,
}

impl ApiConfig {
    pub fn from_toml(document: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(document).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml(&text)?;
        if config.storage_path.is_relative() {
            if let Some(dir) = path.parent() {
                config.storage_path = dir.join(&config.storage_path);
            }
        }
        if let Some(replies) = &config.scripted_replies {
            if replies.is_relative() {
                if let Some(dir) = path.parent() {
                    config.scripted_replies = Some(dir.join(replies));
                }
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut problems = Vec::new();
        if self.locales.is_empty() {
            problems.push("at least one locale must be configured".to_string());
        }
        if self.bind_address.parse::<std::net::SocketAddr>().is_err() {
            problems.push(format!("bind_address `{}` is not host:port", self.bind_address));
        }
        if self.provider_mode == ProviderMode::Scripted && self.scripted_replies.is_none() {
            problems.push("provider_mode = \"scripted\" needs scripted_replies".into());
        }
        if let Err(mut p) = self.provider.validate() {
            problems.append(&mut p);
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(problems))
        }
    }

    /// The admin token from the environment; `None` disables admin routes.
    pub fn admin_token(&self) -> Option<String> {
        std::env::var(&self.admin_token_ref).ok().filter(|t| !t.is_empty())
    }
}

/// Sample configuration written by `vpsim init`.
pub const SAMPLE_CONFIG: &str = r#"bind_address = "127.0.0.1:8080"
storage_path = "storage"
locales = ["en", "de"]
admin_token_ref = "VPSIM_ADMIN_TOKEN"
assignment_seed = 2025
provider_mode = "http"

[provider]
endpoint_url = "https://api.openai.com/v1/chat/completions"
model_id = "gpt-4"
temperature = 0.7
max_output_tokens = 512
credential_ref = "OPENAI_API_KEY"
timeout_ms = 60000

[provider.retry]
max_attempts = 3
base_backoff_ms = 500

[affect_provider]
kind = "lexicon_mock"
"#;
