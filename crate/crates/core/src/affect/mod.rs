//! Emotion and sentiment analytics.
//!
//! An affect provider scores each message: a 53-emotion probability vector
//! per word and per message, plus a 9-level sentiment distribution. Every
//! vector is checked against the simplex before it is accepted. Conversation
//! profiles, top-k emotion tables, trigger words and sentiment summaries are
//! pure functions over accepted scores.

mod analysis;
mod catalog;
mod provider;
mod vector;

pub use analysis::{
    aggregate_profile, conversation_sentiment, dominant_sentiment, top_emotions, trigger_words,
    CohortAffect, EmotionProfile, MessageScore, WordEmotion,
};
pub use catalog::{emotion_catalog, emotion_index, EMOTION_COUNT};
pub use provider::{
    score_message, tokenize, AffectProvider, AffectProviderConfig, AffectRequest, AffectResponse,
    HttpAffectProvider, LexiconMockProvider, WireWord,
};
pub use vector::{AffectError, EmotionVector, SentimentDistribution, SentimentLevel, SENTIMENT_LEVELS};
