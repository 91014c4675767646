//! Post-chat questionnaire, responses, study metrics and data export.

mod adjectives;
mod export;
mod metrics;
mod questionnaire;
mod response;

pub use adjectives::{AdjectiveMap, AdjectiveMapError};
pub use export::{export_timestamp, write_bundle, ExportBundle, ExportError, SessionRow, TranscriptFile};
pub use metrics::{
    adjective_precision, adjective_precision_from_counts, ai_familiarity_stats, cohort_metrics,
    likert_stats, likert_values, style_identification, AdjectivePrecision, CohortMetrics,
    MetricError, StyleIdentification, AI_FAMILIARITY_ITEMS,
};
pub use questionnaire::{
    Condition, Item, ItemKind, ItemOption, ItemProblem, Questionnaire, QuestionnaireError,
    LIKERT_POINTS,
};
pub use response::{validate_answers, Answer, QuestionnaireResponse, ResponseError};

/// Item id of the style-recognition question.
pub const STYLE_ITEM: &str = "style";
/// Item id of the adjective multi-select.
pub const ADJECTIVE_ITEM: &str = "adjectives";
/// Answer code for "none from above" on the style item.
pub const NONE_OF_ABOVE: &str = "none_of_above";
