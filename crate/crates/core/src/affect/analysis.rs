use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::catalog::{emotion_index, EMOTION_COUNT};
use super::vector::{AffectError, EmotionVector, SentimentDistribution, SentimentLevel};
use crate::stats::{mean_std, MeanStd};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct WordEmotion<T> {
    pub token: String,
    pub position: usize,
    pub scores: EmotionVector<T>,
}

/// Validated affect scores for one message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MessageScore<T> {
    pub words: Vec<WordEmotion<T>>,
    pub message_vector: EmotionVector<T>,
    pub sentiment: SentimentDistribution<T>,
}

/// Element-wise mean of `vectors`, renormalized to absorb rounding.
pub fn aggregate_profile<T: Scalar>(vectors: &[EmotionVector<T>]) -> Result<EmotionVector<T>, AffectError> {
    if vectors.is_empty() {
        return Err(AffectError::EmptyInput);
    }
    let n = T::of_usize(vectors.len());
    let mean: Vec<T> = (0..EMOTION_COUNT)
        .map(|i| vectors.iter().map(|v| v.as_slice()[i]).sum::<T>() / n)
        .collect();
    EmotionVector::normalized(mean)
}

/// Conversation-level emotion profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EmotionProfile<T> {
    pub conversation_id: String,
    pub vector: EmotionVector<T>,
    pub n_messages: usize,
}

impl<T: Scalar> EmotionProfile<T> {
    pub fn from_scores(conversation_id: impl Into<String>, scores: &[MessageScore<T>]) -> Result<Self, AffectError> {
        let vectors: Vec<EmotionVector<T>> = scores.iter().map(|s| s.message_vector.clone()).collect();
        Ok(Self {
            conversation_id: conversation_id.into(),
            vector: aggregate_profile(&vectors)?,
            n_messages: scores.len(),
        })
    }
}

/// The `k` highest-scoring emotions, ties in catalog order.
pub fn top_emotions<T: Scalar>(vector: &EmotionVector<T>, k: usize) -> Result<Vec<(&'static str, T)>, AffectError> {
    if !(1..=EMOTION_COUNT).contains(&k) {
        return Err(AffectError::KOutOfRange { k, max: EMOTION_COUNT });
    }
    let mut ranked: Vec<(usize, &'static str, T)> =
        vector.iter().enumerate().map(|(i, (name, v))| (i, name, v)).collect();
    // Stable sort keeps catalog order among equal scores.
    ranked.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap_or(std::cmp::Ordering::Equal));
    Ok(ranked.into_iter().take(k).map(|(_, name, v)| (name, v)).collect())
}

/// Tokens ranked by their peak score for `emotion`. Tokens are case-folded
/// and deduplicated; ties go to the earlier first occurrence.
pub fn trigger_words<T: Scalar>(
    scored: &[MessageScore<T>],
    emotion: &str,
    k: usize,
) -> Result<Vec<(String, T)>, AffectError> {
    let index = emotion_index(emotion).ok_or_else(|| AffectError::UnknownEmotion(emotion.to_string()))?;
    let mut peaks: Vec<(String, T)> = Vec::new();
    let mut slot: HashMap<String, usize> = HashMap::new();
    for message in scored {
        let mut words: Vec<&WordEmotion<T>> = message.words.iter().collect();
        words.sort_by_key(|w| w.position);
        for word in words {
            let folded = word.token.to_lowercase();
            let score = word.scores.as_slice()[index];
            match slot.get(&folded) {
                Some(&i) => {
                    if score > peaks[i].1 {
                        peaks[i].1 = score;
                    }
                }
                None => {
                    slot.insert(folded.clone(), peaks.len());
                    peaks.push((folded, score));
                }
            }
        }
    }
    peaks.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    peaks.truncate(k);
    Ok(peaks)
}

/// Argmax level; ties go to the lower level.
pub fn dominant_sentiment<T: Scalar>(dist: &SentimentDistribution<T>) -> SentimentLevel {
    let mut best = 0;
    for (i, &p) in dist.levels().iter().enumerate() {
        if p > dist.levels()[best] {
            best = i;
        }
    }
    SentimentLevel::new(best as u8 + 1).expect("index within nine levels")
}

/// Mean of the per-message dominant levels.
pub fn conversation_sentiment<T: Scalar>(messages: &[MessageScore<T>]) -> Result<T, AffectError> {
    if messages.is_empty() {
        return Err(AffectError::EmptyInput);
    }
    let total: T = messages
        .iter()
        .map(|m| T::of(f64::from(dominant_sentiment(&m.sentiment).get())))
        .sum();
    Ok(total / T::of_usize(messages.len()))
}

/// Affect summary over several conversations (one style cohort).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CohortAffect<T> {
    pub conversations: usize,
    pub messages: usize,
    /// Mean of the conversation profiles.
    pub profile: EmotionVector<T>,
    pub top_emotions: Vec<(String, T)>,
    pub conversation_sentiment: Vec<T>,
    pub sentiment: MeanStd<T>,
}

impl<T: Scalar> CohortAffect<T> {
    /// `conversations` holds the scored messages of each conversation; empty
    /// conversations are skipped.
    pub fn summarize(conversations: &[Vec<MessageScore<T>>], k: usize) -> Result<Self, AffectError> {
        let scored: Vec<&Vec<MessageScore<T>>> = conversations.iter().filter(|c| !c.is_empty()).collect();
        let profiles = scored
            .iter()
            .map(|c| EmotionProfile::from_scores("", c).map(|p| p.vector))
            .collect::<Result<Vec<_>, _>>()?;
        let profile = aggregate_profile(&profiles)?;
        let top = top_emotions(&profile, k)?
            .into_iter()
            .map(|(n, v)| (n.to_string(), v))
            .collect();
        let sentiments = scored
            .iter()
            .map(|c| conversation_sentiment(c))
            .collect::<Result<Vec<T>, _>>()?;
        let sentiment = mean_std(&sentiments).ok_or(AffectError::EmptyInput)?;
        Ok(Self {
            conversations: scored.len(),
            messages: scored.iter().map(|c| c.len()).sum(),
            profile,
            top_emotions: top,
            conversation_sentiment: sentiments,
            sentiment,
        })
    }
}
