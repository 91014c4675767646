use std::collections::{BTreeMap, HashSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::questionnaire::{Item, ItemKind, ItemProblem, Questionnaire};

/// One answer. Likert answers may arrive as option codes (`choice` /
/// `choices`); [`validate_answers`] converts them to coded values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Answer {
    /// Coded value 1..=5, 5 being the most positive.
    Likert(u8),
    LikertSeries(Vec<u8>),
    Choice(String),
    Choices(Vec<String>),
    Text(String),
    Skipped,
}

impl Answer {
    pub fn type_name(&self) -> &'static str {
        match self {
            Answer::Likert(_) => "likert",
            Answer::LikertSeries(_) => "likert_series",
            Answer::Choice(_) => "choice",
            Answer::Choices(_) => "choices",
            Answer::Text(_) => "text",
            Answer::Skipped => "skipped",
        }
    }

    /// Flat text form used in tabular exports.
    pub fn export_value(&self) -> String {
        match self {
            Answer::Likert(v) => v.to_string(),
            Answer::LikertSeries(vs) => vs.iter().map(u8::to_string).collect::<Vec<_>>().join(";"),
            Answer::Choice(c) => c.clone(),
            Answer::Choices(cs) => cs.join(";"),
            Answer::Text(t) => t.clone(),
            Answer::Skipped => String::new(),
        }
    }

}

/// Option codes selected by a normalized answer to `item`.
fn selected_codes<'a>(item: &'a Item, answer: &'a Answer) -> Vec<&'a str> {
    match answer {
        Answer::Choice(c) => vec![c.as_str()],
        Answer::Choices(cs) => cs.iter().map(String::as_str).collect(),
        Answer::Likert(v) => (0..item.options.len())
            .filter(|&i| item.likert_value(i) == Some(*v))
            .map(|i| item.options[i].code.as_str())
            .collect(),
        _ => Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ResponseError(pub Vec<ItemProblem>);

impl fmt::Display for ResponseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "invalid response: {}", parts.join("; "))
    }
}

/// One participant's validated answers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionnaireResponse {
    pub session_id: String,
    pub questionnaire_version: String,
    pub answers: BTreeMap<String, Answer>,
    pub submitted_at: DateTime<Utc>,
}

impl QuestionnaireResponse {
    pub fn new(
        questionnaire: &Questionnaire,
        session_id: impl Into<String>,
        answers: BTreeMap<String, Answer>,
        submitted_at: DateTime<Utc>,
    ) -> Result<Self, ResponseError> {
        Ok(Self {
            session_id: session_id.into(),
            questionnaire_version: questionnaire.version.clone(),
            answers: validate_answers(questionnaire, answers)?,
            submitted_at,
        })
    }

    pub fn answer(&self, item_id: &str) -> Option<&Answer> {
        self.answers.get(item_id)
    }
}

fn likert_from_code(item: &Item, code: &str) -> Option<u8> {
    item.option_index(code).and_then(|i| item.likert_value(i))
}

fn normalize(item: &Item, answer: Answer) -> Result<Answer, String> {
    if answer == Answer::Skipped {
        return Ok(answer);
    }
    let in_range = |v: u8| (1..=5).contains(&v);
    match (item.kind, item.repeat > 1, answer) {
        (ItemKind::Likert5, false, Answer::Likert(v)) if in_range(v) => Ok(Answer::Likert(v)),
        (ItemKind::Likert5, false, Answer::Likert(v)) => Err(format!("likert value {v} outside 1..=5")),
        (ItemKind::Likert5, false, Answer::Choice(code)) => likert_from_code(item, &code)
            .map(Answer::Likert)
            .ok_or_else(|| format!("`{code}` is not an option")),
        (ItemKind::Likert5, true, Answer::LikertSeries(vs)) => {
            if vs.len() != item.repeat as usize {
                return Err(format!("expected {} ratings, got {}", item.repeat, vs.len()));
            }
            match vs.iter().find(|v| !in_range(**v)) {
                Some(v) => Err(format!("likert value {v} outside 1..=5")),
                None => Ok(Answer::LikertSeries(vs)),
            }
        }
        (ItemKind::Likert5, true, Answer::Choices(codes)) => {
            if codes.len() != item.repeat as usize {
                return Err(format!("expected {} ratings, got {}", item.repeat, codes.len()));
            }
            codes
                .iter()
                .map(|c| likert_from_code(item, c).ok_or_else(|| format!("`{c}` is not an option")))
                .collect::<Result<Vec<u8>, _>>()
                .map(Answer::LikertSeries)
        }
        (ItemKind::SingleChoice, _, Answer::Choice(code)) => {
            if item.has_option(&code) {
                Ok(Answer::Choice(code))
            } else {
                Err(format!("`{code}` is not an option"))
            }
        }
        (ItemKind::MultiSelect, _, Answer::Choices(codes)) => {
            let mut seen = HashSet::new();
            for code in &codes {
                if !item.has_option(code) {
                    return Err(format!("`{code}` is not an option"));
                }
                if !seen.insert(code.as_str()) {
                    return Err(format!("`{code}` selected twice"));
                }
            }
            Ok(Answer::Choices(codes))
        }
        (ItemKind::FreeText, _, Answer::Text(text)) => Ok(Answer::Text(text)),
        (kind, _, answer) => Err(format!("{} answer does not fit a {kind:?} item", answer.type_name())),
    }
}

/// Checks `answers` against `questionnaire` and returns them normalized.
///
/// Unconditional items must be answered or explicitly skipped. Conditional
/// items are optional, and rejected when their condition is not met.
pub fn validate_answers(
    questionnaire: &Questionnaire,
    mut answers: BTreeMap<String, Answer>,
) -> Result<BTreeMap<String, Answer>, ResponseError> {
    let mut problems = Vec::new();
    let mut out = BTreeMap::new();
    let problem = |item: &str, message: String| ItemProblem {
        item: item.to_string(),
        message,
    };

    for item in &questionnaire.items {
        let answer = answers.remove(&item.id);
        let condition_met = match &item.conditional_on {
            None => true,
            Some(condition) => out.get(&condition.item).is_some_and(|a| {
                let codes = questionnaire
                    .item(&condition.item)
                    .map(|target| selected_codes(target, a))
                    .unwrap_or_default();
                condition.options.iter().any(|o| codes.contains(&o.as_str()))
            }),
        };
        match answer {
            None if item.conditional_on.is_none() => {
                problems.push(problem(&item.id, "missing answer (use `skipped` to skip)".into()))
            }
            None => {}
            Some(answer) if !condition_met && answer != Answer::Skipped => problems.push(problem(
                &item.id,
                "answered although its condition is not met".into(),
            )),
            Some(answer) => match normalize(item, answer) {
                Ok(normalized) => {
                    out.insert(item.id.clone(), normalized);
                }
                Err(message) => problems.push(problem(&item.id, message)),
            },
        }
    }
    for unknown in answers.keys() {
        problems.push(problem(unknown, "unknown item".into()));
    }
    if problems.is_empty() {
        Ok(out)
    } else {
        Err(ResponseError(problems))
    }
}
