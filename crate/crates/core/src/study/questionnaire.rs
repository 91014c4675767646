use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::Locale;

pub const LIKERT_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    Likert5,
    SingleChoice,
    MultiSelect,
    FreeText,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemOption {
    pub code: String,
    pub label: String,
}

/// Shows an item only when `item` was answered with one of `options`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Condition {
    pub item: String,
    pub options: Vec<String>,
}

fn one() -> u32 {
    1
}

fn is_one(v: &u32) -> bool {
    *v == 1
}

fn is_false(v: &bool) -> bool {
    !*v
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Item {
    pub id: String,
    pub kind: ItemKind,
    pub prompt: String,
    /// Number of times the item is asked (e.g. once per rated answer).
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub repeat: u32,
    /// Options run from the positive to the negative pole.
    #[serde(default, skip_serializing_if = "is_false")]
    pub reverse_coded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional_on: Option<Condition>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub options: Vec<ItemOption>,
}

impl Item {
    pub fn option_index(&self, code: &str) -> Option<usize> {
        self.options.iter().position(|o| o.code == code)
    }

    pub fn has_option(&self, code: &str) -> bool {
        self.option_index(code).is_some()
    }

    /// Likert value 1..=5 (5 = most positive) of the option at `index`.
    pub fn likert_value(&self, index: usize) -> Option<u8> {
        if self.kind != ItemKind::Likert5 || index >= LIKERT_POINTS {
            return None;
        }
        let value = if self.reverse_coded {
            LIKERT_POINTS - index
        } else {
            index + 1
        };
        Some(value as u8)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ItemProblem {
    pub item: String,
    pub message: String,
}

impl fmt::Display for ItemProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.item, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuestionnaireError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid questionnaire: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ItemProblem>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Questionnaire {
    pub version: String,
    pub locale: Locale,
    pub items: Vec<Item>,
}

impl Questionnaire {
    pub fn from_toml(document: &str) -> Result<Self, QuestionnaireError> {
        let questionnaire: Self =
            toml::from_str(document).map_err(|e| QuestionnaireError::Parse(e.to_string()))?;
        questionnaire.validate()?;
        Ok(questionnaire)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("questionnaire always serializes")
    }

    pub fn bundled(locale: Locale) -> Self {
        Self::from_toml(crate::bundled::questionnaire(locale)).expect("bundled questionnaire is valid")
    }

    pub fn item(&self, id: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn validate(&self) -> Result<(), QuestionnaireError> {
        let mut problems = Vec::new();
        let mut seen: HashSet<&str> = HashSet::new();
        let problem = |item: &str, message: String| ItemProblem {
            item: item.to_string(),
            message,
        };
        for item in &self.items {
            if !seen.insert(item.id.as_str()) {
                problems.push(problem(&item.id, "duplicate item id".into()));
            }
            if item.prompt.trim().is_empty() {
                problems.push(problem(&item.id, "empty prompt".into()));
            }
            let n = item.options.len();
            match item.kind {
                ItemKind::Likert5 if n != LIKERT_POINTS => {
                    problems.push(problem(&item.id, format!("likert5 needs 5 options, has {n}")))
                }
                ItemKind::SingleChoice | ItemKind::MultiSelect if n < 2 => {
                    problems.push(problem(&item.id, "choice items need at least 2 options".into()))
                }
                ItemKind::FreeText if n != 0 => {
                    problems.push(problem(&item.id, "free_text items take no options".into()))
                }
                _ => {}
            }
            let codes: HashSet<&str> = item.options.iter().map(|o| o.code.as_str()).collect();
            if codes.len() != n {
                problems.push(problem(&item.id, "duplicate option code".into()));
            }
            if item.repeat == 0 || (item.repeat > 1 && item.kind != ItemKind::Likert5) {
                problems.push(problem(&item.id, "repeat must be 1, or >1 on likert5 items".into()));
            }
            if item.reverse_coded && item.kind != ItemKind::Likert5 {
                problems.push(problem(&item.id, "only likert5 items can be reverse coded".into()));
            }
            if let Some(condition) = &item.conditional_on {
                // Conditions may only point backwards, so the wizard can
                // evaluate them in order.
                match self.items.iter().take_while(|i| i.id != item.id).find(|i| i.id == condition.item) {
                    None => problems.push(problem(
                        &item.id,
                        format!("conditional_on references unknown or later item `{}`", condition.item),
                    )),
                    Some(target) => {
                        if condition.options.is_empty() {
                            problems.push(problem(&item.id, "condition lists no options".into()));
                        }
                        for code in &condition.options {
                            if !target.has_option(code) {
                                problems.push(problem(
                                    &item.id,
                                    format!("condition option `{code}` not offered by `{}`", target.id),
                                ));
                            }
                        }
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(QuestionnaireError::Invalid(problems))
        }
    }
}
