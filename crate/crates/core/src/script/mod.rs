//! Illness scripts: the structured case record behind every VP.
//!
//! A script is a TOML document with a persona, six style-bearing fields, the
//! stubbornness templates and a `[categories]` table for the remaining keys of
//! the [`CategoryManifest`]. See `docs/formats.md` for the schema.

mod document;
mod manifest;
mod render;
mod validate;

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use manifest::{CategoryEntry, CategoryManifest, REQUIRED_CATEGORY_COUNT};
pub use render::{render_full_case, render_short_case, CasePrompt, AUTHORS_NOTE_HEADER};
pub use validate::{validate_script, ValidationReport, Violation};

use crate::prompt::AnnotatedContent;
use crate::{Locale, SatirStyle};

#[derive(Debug, thiserror::Error)]
pub enum ScriptError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid script: {0}")]
    Invalid(ValidationReport),
    #[error("invalid manifest: {}", .0.join("; "))]
    Manifest(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScriptId(pub String);

impl fmt::Display for ScriptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    Diverse,
}

impl Gender {
    /// One-letter code used in prompts.
    pub fn code(self) -> &'static str {
        match self {
            Gender::Male => "m",
            Gender::Female => "f",
            Gender::Diverse => "d",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Persona {
    pub first_name: String,
    pub last_name: String,
    pub age: u32,
    pub gender: Gender,
    pub occupation: String,
}

impl Persona {
    pub fn full_name(&self) -> String {
        format!("{} {}", self.first_name, self.last_name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvoidedTopic {
    pub topic: String,
    pub reaction: String,
}

/// The fields that carry the communication style.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StyleFields {
    pub character_features: String,
    pub mood: String,
    pub topics_to_avoid: Vec<AvoidedTopic>,
    pub starting_message: AnnotatedContent,
    pub communicativeness: String,
    pub adverse_response: String,
}

/// Conditional answers that keep the VP resistant to therapy until the
/// counterpart validates their feelings and links symptoms to life events.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StubbornnessRule {
    pub skeptical_response: String,
    pub hesitant_acceptance: String,
    pub refusal_response: String,
    pub condition_note: String,
}

impl StubbornnessRule {
    pub fn templates(&self) -> [&str; 3] {
        [
            &self.skeptical_response,
            &self.hesitant_acceptance,
            &self.refusal_response,
        ]
    }
}

/// Prompt material that was tried and dropped; stored but never rendered.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionalDisabled {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub canned_negative_answers: Vec<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub nonverbal_cue_prompt: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IllnessScript {
    pub script_id: ScriptId,
    pub style: SatirStyle,
    pub locale: Locale,
    pub persona: Persona,
    /// Free-text categories keyed by manifest key (structured keys excluded).
    pub categories: BTreeMap<String, String>,
    pub style_fields: StyleFields,
    pub stubbornness: StubbornnessRule,
    pub optional_disabled: OptionalDisabled,
}

/// Manifest keys whose value comes from a structured field instead of the
/// `[categories]` table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Binding {
    FirstName,
    LastName,
    Age,
    Gender,
    Job,
    CharacterFeatures,
    Mood,
    TopicsToAvoid,
    StartingMessage,
    Communicativeness,
    AdverseResponse,
}

impl Binding {
    pub(crate) const ALL: [Binding; 11] = [
        Binding::FirstName,
        Binding::LastName,
        Binding::Age,
        Binding::Gender,
        Binding::Job,
        Binding::CharacterFeatures,
        Binding::Mood,
        Binding::TopicsToAvoid,
        Binding::StartingMessage,
        Binding::Communicativeness,
        Binding::AdverseResponse,
    ];

    pub(crate) fn key(self) -> &'static str {
        match self {
            Binding::FirstName => "first_name",
            Binding::LastName => "last_name",
            Binding::Age => "age",
            Binding::Gender => "gender",
            Binding::Job => "job",
            Binding::CharacterFeatures => "character_features",
            Binding::Mood => "mood",
            Binding::TopicsToAvoid => "topics_to_avoid",
            Binding::StartingMessage => "starting_message",
            Binding::Communicativeness => "communicativeness",
            Binding::AdverseResponse => "adverse_response",
        }
    }

    pub(crate) fn for_key(key: &str) -> Option<Binding> {
        Binding::ALL.into_iter().find(|b| b.key() == key)
    }
}

impl IllnessScript {
    /// Text for a manifest key, or `None` when the script lacks it.
    pub fn category_value(&self, key: &str) -> Option<Cow<'_, str>> {
        let Some(binding) = Binding::for_key(key) else {
            return self.categories.get(key).map(|v| Cow::Borrowed(v.as_str()));
        };
        let persona = &self.persona;
        let style = &self.style_fields;
        Some(match binding {
            Binding::FirstName => Cow::Borrowed(persona.first_name.as_str()),
            Binding::LastName => Cow::Borrowed(persona.last_name.as_str()),
            Binding::Age => Cow::Owned(persona.age.to_string()),
            Binding::Gender => Cow::Borrowed(persona.gender.code()),
            Binding::Job => Cow::Borrowed(persona.occupation.as_str()),
            Binding::CharacterFeatures => Cow::Borrowed(style.character_features.as_str()),
            Binding::Mood => Cow::Borrowed(style.mood.as_str()),
            Binding::TopicsToAvoid => Cow::Owned(
                style
                    .topics_to_avoid
                    .iter()
                    .map(|t| format!("{} ({})", t.topic, t.reaction))
                    .collect::<Vec<_>>()
                    .join("; "),
            ),
            Binding::StartingMessage => Cow::Owned(style.starting_message.to_raw()),
            Binding::Communicativeness => Cow::Borrowed(style.communicativeness.as_str()),
            Binding::AdverseResponse => Cow::Borrowed(style.adverse_response.as_str()),
        })
    }

    /// Serializes to the script document format.
    pub fn to_toml(&self) -> String {
        document::to_toml(self)
    }
}

/// Parses and validates a script document against `manifest`.
pub fn load_script(document: &str, manifest: &CategoryManifest) -> Result<IllnessScript, ScriptError> {
    document::load(document, manifest)
}
