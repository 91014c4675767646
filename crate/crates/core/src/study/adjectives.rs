use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::questionnaire::Questionnaire;
use super::ADJECTIVE_ITEM;
use crate::SatirStyle;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdjectiveMapError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("adjective `{0}` maps to congruent; only the four incongruent styles are allowed")]
    Congruent(String),
    #[error("adjective option `{0}` has no mapping")]
    Unmapped(String),
    #[error("mapped adjective `{0}` is not offered by the questionnaire")]
    Unoffered(String),
}

/// Adjective → style mapping used by adjective precision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjectiveMap {
    entries: BTreeMap<String, SatirStyle>,
}

impl AdjectiveMap {
    pub fn new(entries: BTreeMap<String, SatirStyle>) -> Result<Self, AdjectiveMapError> {
        if let Some((adjective, _)) = entries.iter().find(|(_, s)| **s == SatirStyle::Congruent) {
            return Err(AdjectiveMapError::Congruent(adjective.clone()));
        }
        Ok(Self { entries })
    }

    pub fn from_toml(document: &str) -> Result<Self, AdjectiveMapError> {
        #[derive(Deserialize)]
        struct Doc {
            entries: BTreeMap<String, SatirStyle>,
        }
        let doc: Doc = toml::from_str(document).map_err(|e| AdjectiveMapError::Parse(e.to_string()))?;
        Self::new(doc.entries)
    }

    pub fn bundled() -> Self {
        Self::from_toml(crate::bundled::ADJECTIVE_MAP).expect("bundled adjective map is valid")
    }

    pub fn style_of(&self, adjective: &str) -> Option<SatirStyle> {
        self.entries.get(adjective).copied()
    }

    pub fn entries(&self) -> &BTreeMap<String, SatirStyle> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The map must cover exactly the adjective item's options.
    pub fn check_against(&self, questionnaire: &Questionnaire) -> Result<(), AdjectiveMapError> {
        let Some(item) = questionnaire.item(ADJECTIVE_ITEM) else {
            return Ok(());
        };
        if let Some(option) = item.options.iter().find(|o| !self.entries.contains_key(&o.code)) {
            return Err(AdjectiveMapError::Unmapped(option.code.clone()));
        }
        if let Some(adjective) = self.entries.keys().find(|a| !item.has_option(a)) {
            return Err(AdjectiveMapError::Unoffered(adjective.clone()));
        }
        Ok(())
    }
}
