//! Data files shipped with the crate.
//!
//! The service seeds its storage directory from these; tests use them as
//! fixtures.

use crate::{Locale, SatirStyle};

pub const MANIFEST: &str = include_str!("../data/manifest.toml");
pub const EMOTION_CATALOG: &str = include_str!("../data/emotions.txt");
pub const ADJECTIVE_MAP: &str = include_str!("../data/adjectives.toml");
pub const MOCK_LEXICON: &str = include_str!("../data/mock_lexicon.toml");
pub const GOLDEN_ACCUSER_EN: &str = include_str!("../data/golden/accuser_en.toml");

pub const QUESTIONNAIRE_EN: &str = include_str!("../data/questionnaires/en.toml");
pub const QUESTIONNAIRE_DE: &str = include_str!("../data/questionnaires/de.toml");

pub const ACCUSER_EN: &str = include_str!("../data/scripts/accuser.en.toml");
pub const ACCUSER_DE: &str = include_str!("../data/scripts/accuser.de.toml");
pub const RATIONALIZER_EN: &str = include_str!("../data/scripts/rationalizer.en.toml");
pub const RATIONALIZER_DE: &str = include_str!("../data/scripts/rationalizer.de.toml");

/// `(file name, style, locale, document)` for every shipped script.
pub const SCRIPTS: [(&str, SatirStyle, Locale, &str); 4] = [
    ("accuser.en.toml", SatirStyle::Accuser, Locale::En, ACCUSER_EN),
    ("accuser.de.toml", SatirStyle::Accuser, Locale::De, ACCUSER_DE),
    ("rationalizer.en.toml", SatirStyle::Rationalizer, Locale::En, RATIONALIZER_EN),
    ("rationalizer.de.toml", SatirStyle::Rationalizer, Locale::De, RATIONALIZER_DE),
];

pub fn questionnaire(locale: Locale) -> &'static str {
    match locale {
        Locale::En => QUESTIONNAIRE_EN,
        Locale::De => QUESTIONNAIRE_DE,
    }
}

pub fn script(style: SatirStyle, locale: Locale) -> Option<&'static str> {
    SCRIPTS
        .iter()
        .find(|(_, s, l, _)| *s == style && *l == locale)
        .map(|(_, _, _, doc)| *doc)
}
