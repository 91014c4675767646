use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    validate_script, AvoidedTopic, CategoryManifest, IllnessScript, OptionalDisabled, Persona,
    ScriptError, ScriptId, StubbornnessRule, StyleFields, ValidationReport, Violation,
};
use crate::prompt::{parse_annotations, AnnotatedContent};
use crate::{Locale, SatirStyle};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptDocument {
    script_id: String,
    style: SatirStyle,
    locale: Locale,
    persona: Persona,
    style_fields: StyleFieldsDocument,
    stubbornness: StubbornnessRule,
    #[serde(default)]
    categories: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "is_default")]
    optional_disabled: OptionalDisabled,
}

fn is_default(value: &OptionalDisabled) -> bool {
    *value == OptionalDisabled::default()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StyleFieldsDocument {
    character_features: String,
    mood: String,
    starting_message: String,
    communicativeness: String,
    adverse_response: String,
    #[serde(default)]
    topics_to_avoid: Vec<AvoidedTopic>,
}

pub(super) fn load(document: &str, manifest: &CategoryManifest) -> Result<IllnessScript, ScriptError> {
    let doc: ScriptDocument =
        toml::from_str(document).map_err(|e| ScriptError::Parse(e.to_string()))?;

    let mut violations = Vec::new();
    let starting_message = match parse_annotations(&doc.style_fields.starting_message) {
        Ok(content) => content,
        Err(e) => {
            violations.push(Violation::new("starting_message", format!("annotation grammar: {e}")));
            AnnotatedContent::new(Vec::new(), doc.style_fields.starting_message.clone())
        }
    };

    let script = IllnessScript {
        script_id: ScriptId(doc.script_id),
        style: doc.style,
        locale: doc.locale,
        persona: doc.persona,
        categories: doc.categories,
        style_fields: StyleFields {
            character_features: doc.style_fields.character_features,
            mood: doc.style_fields.mood,
            topics_to_avoid: doc.style_fields.topics_to_avoid,
            starting_message,
            communicativeness: doc.style_fields.communicativeness,
            adverse_response: doc.style_fields.adverse_response,
        },
        stubbornness: doc.stubbornness,
        optional_disabled: doc.optional_disabled,
    };

    violations.extend(validate_script(&script, manifest).into_violations());
    if violations.is_empty() {
        Ok(script)
    } else {
        Err(ScriptError::Invalid(ValidationReport::from(violations)))
    }
}

pub(super) fn to_toml(script: &IllnessScript) -> String {
    let doc = ScriptDocument {
        script_id: script.script_id.0.clone(),
        style: script.style,
        locale: script.locale,
        persona: script.persona.clone(),
        style_fields: StyleFieldsDocument {
            character_features: script.style_fields.character_features.clone(),
            mood: script.style_fields.mood.clone(),
            starting_message: script.style_fields.starting_message.to_raw(),
            communicativeness: script.style_fields.communicativeness.clone(),
            adverse_response: script.style_fields.adverse_response.clone(),
            topics_to_avoid: script.style_fields.topics_to_avoid.clone(),
        },
        stubbornness: script.stubbornness.clone(),
        categories: script.categories.clone(),
        optional_disabled: script.optional_disabled.clone(),
    };
    toml::to_string(&doc).expect("script documents always serialize")
}
