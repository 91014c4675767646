use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

use super::analysis::{MessageScore, WordEmotion};
use super::catalog::{emotion_catalog, emotion_index, EMOTION_COUNT};
use super::vector::{AffectError, EmotionVector, SentimentDistribution, SentimentLevel, SENTIMENT_LEVELS};
use crate::{Locale, Scalar};

/// Request sent to an affect provider.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffectRequest {
    pub text: String,
    pub locale: Locale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireWord {
    pub token: String,
    pub position: usize,
    pub scores: BTreeMap<String, f64>,
}

/// Provider response; validated by [`score_message`] before use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffectResponse {
    pub words: Vec<WireWord>,
    pub message: BTreeMap<String, f64>,
    pub sentiment: Vec<f64>,
}

#[async_trait]
pub trait AffectProvider: Send + Sync {
    async fn analyze(&self, request: &AffectRequest) -> Result<AffectResponse, AffectError>;
}

/// Splits on whitespace and strips leading/trailing non-alphanumerics.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .collect()
}

fn to_scalar_map<T: Scalar>(map: &BTreeMap<String, f64>) -> impl Iterator<Item = (&str, T)> + '_ {
    map.iter().map(|(k, v)| (k.as_str(), T::of(*v)))
}

/// Scores `text` and validates every vector the provider returns.
pub async fn score_message<T: Scalar>(
    text: &str,
    locale: Locale,
    provider: &dyn AffectProvider,
) -> Result<MessageScore<T>, AffectError> {
    if text.trim().is_empty() {
        return Err(AffectError::EmptyText);
    }
    let request = AffectRequest {
        text: text.to_string(),
        locale,
    };
    let response = provider.analyze(&request).await?;

    let mut positions = std::collections::HashSet::new();
    let mut words = Vec::with_capacity(response.words.len());
    for word in &response.words {
        if !positions.insert(word.position) {
            return Err(AffectError::DuplicatePosition(word.position));
        }
        words.push(WordEmotion {
            token: word.token.clone(),
            position: word.position,
            scores: EmotionVector::from_scores(to_scalar_map::<T>(&word.scores))?,
        });
    }
    let message_vector = EmotionVector::from_scores(to_scalar_map::<T>(&response.message))?;
    let levels: Vec<T> = response.sentiment.iter().map(|v| T::of(*v)).collect();
    let sentiment = SentimentDistribution::from_levels(&levels)?;
    Ok(MessageScore {
        words,
        message_vector,
        sentiment,
    })
}

fn dense_to_map(scores: &[f64]) -> BTreeMap<String, f64> {
    emotion_catalog()
        .iter()
        .zip(scores)
        .map(|(name, v)| (name.to_string(), *v))
        .collect()
}

#[derive(Deserialize)]
struct LexiconDocument {
    emotions: BTreeMap<String, String>,
    #[serde(default)]
    sentiment: BTreeMap<String, u8>,
}

/// Deterministic stand-in for an external emotion model.
///
/// Each token puts mass 1 on its mapped emotion, or 1/53 on every emotion if
/// unmapped; the message vector is the mean over tokens. Sentiment is the
/// normalized histogram of mapped token levels, uniform when none map.
#[derive(Debug, Clone)]
pub struct LexiconMockProvider {
    emotions: HashMap<String, usize>,
    sentiment: HashMap<String, SentimentLevel>,
}

impl LexiconMockProvider {
    pub fn new(
        emotions: impl IntoIterator<Item = (String, String)>,
        sentiment: impl IntoIterator<Item = (String, u8)>,
    ) -> Result<Self, AffectError> {
        let emotions = emotions
            .into_iter()
            .map(|(token, name)| {
                emotion_index(&name)
                    .map(|i| (token.to_lowercase(), i))
                    .ok_or(AffectError::UnknownEmotion(name))
            })
            .collect::<Result<HashMap<_, _>, _>>()?;
        let sentiment = sentiment
            .into_iter()
            .map(|(token, level)| SentimentLevel::new(level).map(|l| (token.to_lowercase(), l)))
            .collect::<Result<HashMap<_, _>, _>>()?;
        if emotions.is_empty() {
            return Err(AffectError::Provider("mock lexicon is empty".into()));
        }
        Ok(Self { emotions, sentiment })
    }

    pub fn from_toml(document: &str) -> Result<Self, AffectError> {
        let doc: LexiconDocument =
            toml::from_str(document).map_err(|e| AffectError::Provider(format!("lexicon: {e}")))?;
        Self::new(doc.emotions, doc.sentiment)
    }

    pub fn bundled() -> Self {
        Self::from_toml(crate::bundled::MOCK_LEXICON).expect("bundled lexicon is valid")
    }

    fn word_vector(&self, token: &str) -> Vec<f64> {
        match self.emotions.get(&token.to_lowercase()) {
            Some(&index) => {
                let mut v = vec![0.0; EMOTION_COUNT];
                v[index] = 1.0;
                v
            }
            None => vec![1.0 / EMOTION_COUNT as f64; EMOTION_COUNT],
        }
    }

    /// The response computed synchronously.
    pub fn respond(&self, text: &str) -> AffectResponse {
        let tokens = tokenize(text);
        let mut message = vec![0.0; EMOTION_COUNT];
        let mut histogram = [0usize; SENTIMENT_LEVELS];
        let mut words = Vec::with_capacity(tokens.len());
        for (position, token) in tokens.iter().enumerate() {
            let vector = self.word_vector(token);
            for (acc, v) in message.iter_mut().zip(&vector) {
                *acc += v;
            }
            if let Some(level) = self.sentiment.get(&token.to_lowercase()) {
                histogram[usize::from(level.get()) - 1] += 1;
            }
            words.push(WireWord {
                token: token.to_string(),
                position,
                scores: dense_to_map(&vector),
            });
        }
        if tokens.is_empty() {
            message = vec![1.0 / EMOTION_COUNT as f64; EMOTION_COUNT];
        } else {
            let n = tokens.len() as f64;
            message.iter_mut().for_each(|v| *v /= n);
        }
        let mapped: usize = histogram.iter().sum();
        let sentiment = if mapped == 0 {
            vec![1.0 / SENTIMENT_LEVELS as f64; SENTIMENT_LEVELS]
        } else {
            histogram.iter().map(|&c| c as f64 / mapped as f64).collect()
        };
        AffectResponse {
            words,
            message: dense_to_map(&message),
            sentiment,
        }
    }
}

#[async_trait]
impl AffectProvider for LexiconMockProvider {
    async fn analyze(&self, request: &AffectRequest) -> Result<AffectResponse, AffectError> {
        Ok(self.respond(&request.text))
    }
}

/// Which affect provider the service uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AffectProviderConfig {
    /// The bundled lexicon mock, or a lexicon file.
    LexiconMock {
        #[serde(default)]
        lexicon_path: Option<String>,
    },
    Http {
        endpoint_url: String,
        credential_ref: String,
        #[serde(default = "default_affect_timeout_ms")]
        timeout_ms: u64,
    },
}

fn default_affect_timeout_ms() -> u64 {
    30_000
}

impl Default for AffectProviderConfig {
    fn default() -> Self {
        AffectProviderConfig::LexiconMock { lexicon_path: None }
    }
}

/// JSON-over-HTTP affect provider. Per-word vectors whose sum is positive
/// but off the simplex are rescaled; message and sentiment vectors are
/// passed through and validated strictly.
pub struct HttpAffectProvider {
    client: reqwest::Client,
    endpoint_url: String,
    api_key: Option<String>,
}

impl fmt::Debug for HttpAffectProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpAffectProvider")
            .field("endpoint_url", &self.endpoint_url)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl HttpAffectProvider {
    pub fn new(endpoint_url: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Result<Self, AffectError> {
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| AffectError::Provider(e.to_string()))?;
        Ok(Self {
            client,
            endpoint_url: endpoint_url.into(),
            api_key,
        })
    }

    /// Rescales each per-word vector to sum to one.
    pub fn renormalize_words(response: &mut AffectResponse) {
        for word in &mut response.words {
            let sum: f64 = word.scores.values().sum();
            if sum > 0.0 && sum.is_finite() {
                word.scores.values_mut().for_each(|v| *v /= sum);
            }
        }
    }
}

#[async_trait]
impl AffectProvider for HttpAffectProvider {
    async fn analyze(&self, request: &AffectRequest) -> Result<AffectResponse, AffectError> {
        let mut call = self.client.post(&self.endpoint_url).json(request);
        if let Some(key) = &self.api_key {
            call = call.bearer_auth(key);
        }
        let response = call.send().await.map_err(|e| {
            if e.is_timeout() {
                AffectError::Timeout(e.to_string())
            } else {
                AffectError::Provider(e.to_string())
            }
        })?;
        let status = response.status();
        if !status.is_success() {
            return Err(AffectError::Provider(format!("HTTP {}", status.as_u16())));
        }
        let mut body: AffectResponse = response
            .json()
            .await
            .map_err(|e| AffectError::Provider(format!("malformed response: {e}")))?;
        Self::renormalize_words(&mut body);
        Ok(body)
    }
}
