//! Case text rendering: the condensed role directive and the author's note.

use super::{CategoryManifest, IllnessScript};
use crate::prompt::AnnotatedContent;
use crate::Locale;

pub const AUTHORS_NOTE_HEADER: &str = "<Author's note>";

struct ShortCaseText {
    directive: &'static str,
    counterpart: &'static str,
    start: &'static str,
    end: &'static str,
    goal: &'static str,
    symptoms: &'static str,
    background: &'static str,
    communication: &'static str,
}

const SHORT_EN: ShortCaseText = ShortCaseText {
    directive: "I want you to play the role of",
    counterpart: "and converse with the user (role: psychologist, gender unknown). You don't assist, but have a clear goal in mind for this meeting.",
    start: "[Start of the shortened case information]",
    end: "[End of the shortened case information]",
    goal: "Goal",
    symptoms: "Symptoms",
    background: "Background",
    communication: "Communication type",
};

const SHORT_DE: ShortCaseText = ShortCaseText {
    directive: "Ich möchte, dass du die Rolle von",
    counterpart: "spielst und dich mit dem Nutzer (Rolle: Psychologe, Geschlecht unbekannt) unterhältst. Du assistierst nicht, sondern hast ein klares Ziel für dieses Gespräch.",
    start: "[Beginn der gekürzten Fallinformationen]",
    end: "[Ende der gekürzten Fallinformationen]",
    goal: "Ziel",
    symptoms: "Symptome",
    background: "Hintergrund",
    communication: "Kommunikationstyp",
};

/// Condensed case used as the first system message.
pub fn render_short_case(script: &IllnessScript) -> String {
    let text = match script.locale {
        Locale::En => &SHORT_EN,
        Locale::De => &SHORT_DE,
    };
    let role = match script.locale {
        Locale::En => "role: patient, gender:",
        Locale::De => "Rolle: Patient, Geschlecht:",
    };
    let field = |key: &str| script.category_value(key).unwrap_or_default().into_owned();
    format!(
        "{} {} ({role}{}) {}\n{}\n{}: {}\n{}: {}\n{}: {}\n{}: {}\n{}",
        text.directive,
        script.persona.full_name(),
        script.persona.gender.code(),
        text.counterpart,
        text.start,
        text.goal,
        field("goal"),
        text.symptoms,
        field("symptoms"),
        text.background,
        field("background"),
        text.communication,
        field("communication_type"),
        text.end,
    )
}

/// The author's note: persona line followed by every manifest category as a
/// `[Label: value]` segment, one per line, in manifest order.
pub fn render_full_case(script: &IllnessScript, manifest: &CategoryManifest) -> String {
    let persona = &script.persona;
    let mut out = format!(
        "{AUTHORS_NOTE_HEADER} {}({}, {}): ",
        persona.full_name(),
        persona.age,
        persona.gender.code()
    );
    let segments: Vec<String> = manifest
        .entries()
        .iter()
        .map(|entry| {
            let value = script.category_value(&entry.key).unwrap_or_default();
            format!("[{}: {}]", entry.label, value)
        })
        .collect();
    out.push_str(&segments.join("\n"));
    out
}

/// Everything the prompt layer needs from a script, rendered once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CasePrompt {
    pub short_case: String,
    pub full_case: String,
    pub opening: AnnotatedContent,
}

impl CasePrompt {
    pub fn new(script: &IllnessScript, manifest: &CategoryManifest) -> Self {
        Self {
            short_case: render_short_case(script),
            full_case: render_full_case(script, manifest),
            opening: script.style_fields.starting_message.clone(),
        }
    }
}
