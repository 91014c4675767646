use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::adjectives::AdjectiveMap;
use super::questionnaire::{ItemKind, Questionnaire};
use super::response::{Answer, QuestionnaireResponse};
use super::{ADJECTIVE_ITEM, NONE_OF_ABOVE, STYLE_ITEM};
use crate::stats::{mean_std, MeanStd};
use crate::{SatirStyle, Scalar};

/// The three AI-attitude items.
pub const AI_FAMILIARITY_ITEMS: [&str; 3] = ["ai_trust", "ai_usage", "ai_excitement"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("no numeric answers for item `{0}`")]
    NoData(String),
    #[error("adjective `{0}` has no style mapping")]
    UnmappedAdjective(String),
    #[error("no adjectives selected")]
    NoSelections,
}

/// Numeric codes given for `item_id`; rating series contribute every value.
pub fn likert_values<T: Scalar>(item_id: &str, responses: &[QuestionnaireResponse]) -> Vec<T> {
    responses
        .iter()
        .filter_map(|r| r.answer(item_id))
        .flat_map(|answer| match answer {
            Answer::Likert(v) => vec![*v],
            Answer::LikertSeries(vs) => vs.clone(),
            _ => Vec::new(),
        })
        .map(|v| T::of(f64::from(v)))
        .collect()
}

/// Mean ± sample standard deviation of the coded answers to `item_id`.
pub fn likert_stats<T: Scalar>(item_id: &str, responses: &[QuestionnaireResponse]) -> Result<MeanStd<T>, MetricError> {
    mean_std(&likert_values::<T>(item_id, responses)).ok_or_else(|| MetricError::NoData(item_id.to_string()))
}

/// Per-item stats for the AI-attitude items that have data.
pub fn ai_familiarity_stats<T: Scalar>(responses: &[QuestionnaireResponse]) -> BTreeMap<String, MeanStd<T>> {
    AI_FAMILIARITY_ITEMS
        .iter()
        .filter_map(|item| likert_stats(item, responses).ok().map(|s| (item.to_string(), s)))
        .collect()
}

/// Answer counts on the style-recognition item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StyleIdentification<T> {
    pub true_style: SatirStyle,
    /// Every answer option, zero counts included.
    pub counts: BTreeMap<String, usize>,
    pub total: usize,
    pub correct_fraction: T,
}

pub fn style_identification<T: Scalar>(responses: &[QuestionnaireResponse], true_style: SatirStyle) -> StyleIdentification<T> {
    let mut counts: BTreeMap<String, usize> = SatirStyle::ALL
        .iter()
        .map(|s| s.as_str().to_string())
        .chain(std::iter::once(NONE_OF_ABOVE.to_string()))
        .map(|k| (k, 0))
        .collect();
    for response in responses {
        if let Some(Answer::Choice(code)) = response.answer(STYLE_ITEM) {
            *counts.entry(code.clone()).or_default() += 1;
        }
    }
    let total: usize = counts.values().sum();
    let correct = counts[true_style.as_str()];
    let correct_fraction = if total == 0 {
        T::zero()
    } else {
        T::of_usize(correct) / T::of_usize(total)
    };
    StyleIdentification {
        true_style,
        counts,
        total,
        correct_fraction,
    }
}

/// Share of selected adjectives mapping to each incongruent style.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AdjectivePrecision<T> {
    pub target: SatirStyle,
    pub total: usize,
    pub counts: BTreeMap<SatirStyle, usize>,
    /// Percent of all selections, per style.
    pub percentages: BTreeMap<SatirStyle, T>,
}

impl<T: Scalar> AdjectivePrecision<T> {
    /// Percentage of selections that map to the target style.
    pub fn precision(&self) -> T {
        self.percentages.get(&self.target).copied().unwrap_or_else(T::zero)
    }
}

pub fn adjective_precision_from_counts<T: Scalar>(
    counts: &BTreeMap<SatirStyle, usize>,
    target: SatirStyle,
) -> Result<AdjectivePrecision<T>, MetricError> {
    let mut full: BTreeMap<SatirStyle, usize> = SatirStyle::INCONGRUENT.iter().map(|s| (*s, 0)).collect();
    for (style, count) in counts {
        *full.entry(*style).or_default() += count;
    }
    let total: usize = full.values().sum();
    if total == 0 {
        return Err(MetricError::NoSelections);
    }
    let hundred = T::of(100.0);
    let percentages = full
        .iter()
        .map(|(s, c)| (*s, hundred * T::of_usize(*c) / T::of_usize(total)))
        .collect();
    Ok(AdjectivePrecision {
        target,
        total,
        counts: full,
        percentages,
    })
}

pub fn adjective_precision<T: Scalar>(
    responses: &[QuestionnaireResponse],
    target: SatirStyle,
    map: &AdjectiveMap,
) -> Result<AdjectivePrecision<T>, MetricError> {
    let mut counts = BTreeMap::new();
    for response in responses {
        if let Some(Answer::Choices(selected)) = response.answer(ADJECTIVE_ITEM) {
            for adjective in selected {
                let style = map
                    .style_of(adjective)
                    .ok_or_else(|| MetricError::UnmappedAdjective(adjective.clone()))?;
                *counts.entry(style).or_insert(0) += 1;
            }
        }
    }
    adjective_precision_from_counts(&counts, target)
}

/// Every questionnaire metric for one style cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CohortMetrics<T> {
    pub style: SatirStyle,
    pub respondents: usize,
    /// Stats for every likert item with data, keyed by item id.
    pub likert: BTreeMap<String, MeanStd<T>>,
    pub style_identification: StyleIdentification<T>,
    pub adjective_precision: Option<AdjectivePrecision<T>>,
    pub ai_familiarity: BTreeMap<String, MeanStd<T>>,
}

pub fn cohort_metrics<T: Scalar>(
    questionnaire: &Questionnaire,
    responses: &[QuestionnaireResponse],
    style: SatirStyle,
    map: &AdjectiveMap,
) -> Result<CohortMetrics<T>, MetricError> {
    let likert = questionnaire
        .items
        .iter()
        .filter(|i| i.kind == ItemKind::Likert5)
        .filter_map(|i| likert_stats(&i.id, responses).ok().map(|s| (i.id.clone(), s)))
        .collect();
    let adjective_precision = match adjective_precision(responses, style, map) {
        Ok(p) => Some(p),
        Err(MetricError::NoSelections) => None,
        Err(e) => return Err(e),
    };
    Ok(CohortMetrics {
        style,
        respondents: responses.len(),
        likert,
        style_identification: style_identification(responses, style),
        adjective_precision,
        ai_familiarity: ai_familiarity_stats(responses),
    })
}
