use std::fmt;

use serde::Serialize;

use super::{Binding, CategoryManifest, IllnessScript};

/// One broken invariant, tied to the offending key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub key: String,
    pub message: String,
}

impl Violation {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

/// Violations found in a script; empty iff the script is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn into_violations(self) -> Vec<Violation> {
        self.violations
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.violations.iter().map(|v| v.key.as_str())
    }
}

impl From<Vec<Violation>> for ValidationReport {
    fn from(violations: Vec<Violation>) -> Self {
        Self { violations }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Checks every script invariant against `manifest`.
pub fn validate_script(script: &IllnessScript, manifest: &CategoryManifest) -> ValidationReport {
    let mut out = Vec::new();

    for key in manifest.keys() {
        match script.category_value(key) {
            None => out.push(Violation::new(key, "missing required category")),
            Some(value) if value.trim().is_empty() && !manifest.is_blank_allowed(key) => {
                out.push(Violation::new(key, "must not be blank"))
            }
            Some(_) => {}
        }
    }
    for key in script.categories.keys() {
        if Binding::for_key(key).is_some() {
            out.push(Violation::new(
                key.as_str(),
                "set through its structured field, not [categories]",
            ));
        } else if !manifest.contains(key) {
            out.push(Violation::new(key.as_str(), "not a manifest category"));
        }
    }

    if script.persona.age == 0 {
        out.push(Violation::new("age", "age must be positive"));
    }
    if script.script_id.0.trim().is_empty() {
        out.push(Violation::new("script_id", "must not be blank"));
    }
    for (i, topic) in script.style_fields.topics_to_avoid.iter().enumerate() {
        if topic.topic.trim().is_empty() || topic.reaction.trim().is_empty() {
            out.push(Violation::new(
                "topics_to_avoid",
                format!("entry {i} needs both topic and reaction"),
            ));
        }
    }
    if script.style_fields.starting_message.visible_text().trim().is_empty() {
        out.push(Violation::new("starting_message", "visible text must not be empty"));
    }

    let rule = &script.stubbornness;
    let named = [
        ("stubbornness.skeptical_response", &rule.skeptical_response),
        ("stubbornness.hesitant_acceptance", &rule.hesitant_acceptance),
        ("stubbornness.refusal_response", &rule.refusal_response),
    ];
    for (i, (name, text)) in named.iter().enumerate() {
        if text.trim().is_empty() {
            out.push(Violation::new(*name, "must not be blank"));
            continue;
        }
        if named[..i].iter().any(|(_, other)| other == text) {
            out.push(Violation::new(*name, "duplicates another stubbornness response"));
        }
        if !script.style_fields.communicativeness.contains(text.as_str()) {
            out.push(Violation::new(
                "communicativeness",
                format!("missing {name} template verbatim"),
            ));
        }
    }

    ValidationReport::from(out)
}
