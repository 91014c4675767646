use std::collections::BTreeMap;
use std::fmt;

use serde::de::Deserializer;
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use super::catalog::{emotion_catalog, emotion_index, EMOTION_COUNT};
use crate::Scalar;

pub const SENTIMENT_LEVELS: usize = 9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AffectError {
    #[error("missing emotion `{0}`")]
    MissingEmotion(String),
    #[error("unknown emotion `{0}`")]
    UnknownEmotion(String),
    #[error("duplicate emotion `{0}`")]
    DuplicateEmotion(String),
    #[error("score for `{name}` is {value}, outside [0, 1]")]
    OutOfRange { name: String, value: f64 },
    #[error("{what} sums to {sum}, not 1")]
    NotNormalized { what: &'static str, sum: f64 },
    #[error("sentiment needs {SENTIMENT_LEVELS} levels, got {0}")]
    SentimentLength(usize),
    #[error("sentiment level {0} outside 1..=9")]
    LevelOutOfRange(u8),
    #[error("duplicate word position {0}")]
    DuplicatePosition(usize),
    #[error("text must not be empty")]
    EmptyText,
    #[error("no input to aggregate")]
    EmptyInput,
    #[error("k = {k} outside 1..={max}")]
    KOutOfRange { k: usize, max: usize },
    #[error("affect provider failed: {0}")]
    Provider(String),
    #[error("affect provider timed out: {0}")]
    Timeout(String),
}

fn check_unit<T: Scalar>(name: &str, value: T) -> Result<(), AffectError> {
    if !value.is_finite() || value < T::zero() || value > T::one() {
        return Err(AffectError::OutOfRange {
            name: name.to_string(),
            value: value.to_f64_lossy(),
        });
    }
    Ok(())
}

fn check_sum<T: Scalar>(what: &'static str, values: &[T]) -> Result<(), AffectError> {
    let sum: T = values.iter().copied().sum();
    if (sum - T::one()).abs() > T::simplex_tolerance() {
        return Err(AffectError::NotNormalized {
            what,
            sum: sum.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Scores for the 53 catalog emotions, in catalog order, on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionVector<T> {
    scores: Vec<T>,
}

impl<T: Scalar> EmotionVector<T> {
    /// Validates name → score pairs: exactly the catalog names, each score
    /// in [0, 1], summing to one.
    pub fn from_scores<I, S>(pairs: I) -> Result<Self, AffectError>
    where
        I: IntoIterator<Item = (S, T)>,
        S: AsRef<str>,
    {
        let mut scores: Vec<Option<T>> = vec![None; EMOTION_COUNT];
        for (name, value) in pairs {
            let name = name.as_ref();
            let index = emotion_index(name).ok_or_else(|| AffectError::UnknownEmotion(name.to_string()))?;
            if scores[index].replace(value).is_some() {
                return Err(AffectError::DuplicateEmotion(name.to_string()));
            }
        }
        let mut dense = Vec::with_capacity(EMOTION_COUNT);
        for (index, value) in scores.into_iter().enumerate() {
            let name = emotion_catalog()[index];
            dense.push(value.ok_or_else(|| AffectError::MissingEmotion(name.to_string()))?);
        }
        Self::from_dense(dense)
    }

    /// Validates scores given in catalog order.
    pub fn from_dense(scores: Vec<T>) -> Result<Self, AffectError> {
        if scores.len() != EMOTION_COUNT {
            let missing = emotion_catalog()
                .get(scores.len().min(EMOTION_COUNT))
                .copied()
                .unwrap_or("<extra>");
            return Err(AffectError::MissingEmotion(missing.to_string()));
        }
        for (name, &value) in emotion_catalog().iter().zip(&scores) {
            check_unit(name, value)?;
        }
        check_sum("emotion vector", &scores)?;
        Ok(Self { scores })
    }

    /// All mass on one emotion.
    pub fn one_hot(index: usize) -> Self {
        assert!(index < EMOTION_COUNT, "emotion index out of range");
        let mut scores = vec![T::zero(); EMOTION_COUNT];
        scores[index] = T::one();
        Self { scores }
    }

    pub fn uniform() -> Self {
        Self {
            scores: vec![T::one() / T::of_usize(EMOTION_COUNT); EMOTION_COUNT],
        }
    }

    /// Divides by the sum; for vectors whose entries are non-negative.
    pub(crate) fn normalized(mut raw: Vec<T>) -> Result<Self, AffectError> {
        let sum: T = raw.iter().copied().sum();
        if sum <= T::zero() || !sum.is_finite() {
            return Err(AffectError::NotNormalized {
                what: "emotion vector",
                sum: sum.to_f64_lossy(),
            });
        }
        for value in &mut raw {
            *value = *value / sum;
        }
        Self::from_dense(raw)
    }

    pub fn get(&self, name: &str) -> Option<T> {
        emotion_index(name).map(|i| self.scores[i])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.scores
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, T)> + '_ {
        emotion_catalog().iter().copied().zip(self.scores.iter().copied())
    }

    pub fn sum(&self) -> T {
        self.scores.iter().copied().sum()
    }
}

impl<T: Scalar> Serialize for EmotionVector<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(EMOTION_COUNT))?;
        for (name, value) in self.iter() {
            map.serialize_entry(name, &value)?;
        }
        map.end()
    }
}

impl<'de, T: Scalar> Deserialize<'de> for EmotionVector<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, T>::deserialize(deserializer)?;
        Self::from_scores(map).map_err(serde::de::Error::custom)
    }
}

/// Sentiment level from 1 (extremely negative) to 9 (extremely positive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct SentimentLevel(u8);

impl SentimentLevel {
    pub fn new(level: u8) -> Result<Self, AffectError> {
        if (1..=SENTIMENT_LEVELS as u8).contains(&level) {
            Ok(Self(level))
        } else {
            Err(AffectError::LevelOutOfRange(level))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for SentimentLevel {
    type Error = AffectError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<SentimentLevel> for u8 {
    fn from(level: SentimentLevel) -> Self {
        level.0
    }
}

impl fmt::Display for SentimentLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Probabilities of the nine sentiment levels, level 1 first.
#[derive(Debug, Clone, PartialEq)]
pub struct SentimentDistribution<T> {
    levels: [T; SENTIMENT_LEVELS],
}

impl<T: Scalar> SentimentDistribution<T> {
    pub fn from_levels(levels: &[T]) -> Result<Self, AffectError> {
        let levels: [T; SENTIMENT_LEVELS] = levels
            .try_into()
            .map_err(|_| AffectError::SentimentLength(levels.len()))?;
        for (i, &value) in levels.iter().enumerate() {
            check_unit(&format!("sentiment level {}", i + 1), value)?;
        }
        check_sum("sentiment distribution", &levels)?;
        Ok(Self { levels })
    }

    pub fn uniform() -> Self {
        Self {
            levels: [T::one() / T::of_usize(SENTIMENT_LEVELS); SENTIMENT_LEVELS],
        }
    }

    pub fn point(level: SentimentLevel) -> Self {
        let mut levels = [T::zero(); SENTIMENT_LEVELS];
        levels[usize::from(level.get()) - 1] = T::one();
        Self { levels }
    }

    pub fn levels(&self) -> &[T; SENTIMENT_LEVELS] {
        &self.levels
    }

    pub fn probability(&self, level: SentimentLevel) -> T {
        self.levels[usize::from(level.get()) - 1]
    }
}

impl<T: Scalar> Serialize for SentimentDistribution<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.levels.as_slice().serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for SentimentDistribution<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let levels = Vec::<T>::deserialize(deserializer)?;
        Self::from_levels(&levels).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_52_emotions_naming_the_missing_one() {
        let pairs: Vec<(&str, f64)> = emotion_catalog()[..52]
            .iter()
            .map(|n| (*n, 1.0 / 52.0))
            .collect();
        assert_eq!(
            EmotionVector::from_scores(pairs),
            Err(AffectError::MissingEmotion("Triumph".into()))
        );
    }

    #[test]
    fn rejects_negative_and_overweight() {
        let mut scores = vec![0.0_f64; 53];
        scores[0] = 1.1;
        scores[1] = -0.1;
        assert!(matches!(
            EmotionVector::from_dense(scores),
            Err(AffectError::OutOfRange { .. })
        ));
        let mut scores = vec![0.0_f64; 53];
        scores[0] = 0.8;
        scores[1] = 0.5;
        assert!(matches!(
            EmotionVector::from_dense(scores),
            Err(AffectError::NotNormalized { .. })
        ));
    }

    #[test]
    fn serde_round_trip_uses_names() {
        let v = EmotionVector::<f64>::one_hot(emotion_index("Pain").unwrap());
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.starts_with("{\"Admiration\":0.0"));
        let back: EmotionVector<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn sentiment_validation() {
        assert!(SentimentDistribution::<f64>::from_levels(&[0.5; 8]).is_err());
        assert!(SentimentDistribution::<f32>::from_levels(&[1.0 / 9.0; 9]).is_ok());
        assert!(SentimentLevel::new(0).is_err());
        assert!(SentimentLevel::new(10).is_err());
        let bad: Result<SentimentDistribution<f64>, _> = serde_json::from_str("[1.3,0,0,0,0,0,0,0,0]");
        assert!(bad.is_err());
    }
}
