//! Satir communication styles and supported locales.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Stress-time communication style after Virginia Satir.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SatirStyle {
    Appeaser,
    Accuser,
    Rationalizer,
    Distractor,
    Congruent,
}

impl SatirStyle {
    pub const ALL: [SatirStyle; 5] = [
        SatirStyle::Appeaser,
        SatirStyle::Accuser,
        SatirStyle::Rationalizer,
        SatirStyle::Distractor,
        SatirStyle::Congruent,
    ];

    /// The four incongruent styles that descriptor adjectives map onto.
    pub const INCONGRUENT: [SatirStyle; 4] = [
        SatirStyle::Appeaser,
        SatirStyle::Accuser,
        SatirStyle::Rationalizer,
        SatirStyle::Distractor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SatirStyle::Appeaser => "appeaser",
            SatirStyle::Accuser => "accuser",
            SatirStyle::Rationalizer => "rationalizer",
            SatirStyle::Distractor => "distractor",
            SatirStyle::Congruent => "congruent",
        }
    }
}

impl fmt::Display for SatirStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown value `{0}`")]
pub struct UnknownValue(pub String);

impl FromStr for SatirStyle {
    type Err = UnknownValue;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SatirStyle::ALL
            .into_iter()
            .find(|style| style.as_str() == s)
            .ok_or_else(|| UnknownValue(s.to_string()))
    }
}

/// Language of a script, questionnaire and conversation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Locale {
    En,
    De,
}

impl Locale {
    pub const ALL: [Locale; 2] = [Locale::En, Locale::De];

    pub fn as_str(self) -> &'static str {
        match self {
            Locale::En => "en",
            Locale::De => "de",
        }
    }
}

impl fmt::Display for Locale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Locale {
    type Err = UnknownValue;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "en" => Ok(Locale::En),
            "de" => Ok(Locale::De),
            other => Err(UnknownValue(other.to_string())),
        }
    }
}
