//! Core of the virtual-patient simulator.
//!
//! A virtual patient (VP) is an LLM role-playing a patient with a specific
//! Satir communication style. This crate holds everything that does not need
//! a network listener:
//!
//! - [`script`]: illness scripts, the category manifest and case rendering
//! - [`prompt`]: hidden-annotation grammar and prompt-plan assembly with a
//!   dynamically positioned author's note
//! - [`gateway`]: chat-completion providers, retries and a scripted provider
//! - [`engine`]: sessions, balanced VP assignment, turn handling, exclusion
//!   rules and engagement statistics
//! - [`affect`]: emotion/sentiment scoring and conversation-level analysis
//! - [`study`]: the post-chat questionnaire, responses, metrics and export
//!
//! Numeric analytics are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below pin the `f64` instantiations used by the service.

pub mod affect;
pub mod bundled;
pub mod engine;
pub mod gateway;
pub mod prompt;
pub mod scalar;
pub mod script;
pub mod stats;
pub mod study;
pub mod style;

pub use scalar::Scalar;
pub use style::{Locale, SatirStyle};

pub type EmotionVectorF64 = affect::EmotionVector<f64>;
pub type EmotionVectorF32 = affect::EmotionVector<f32>;
pub type SentimentDistributionF64 = affect::SentimentDistribution<f64>;
pub type SentimentDistributionF32 = affect::SentimentDistribution<f32>;
pub type EmotionProfileF64 = affect::EmotionProfile<f64>;
pub type MessageScoreF64 = affect::MessageScore<f64>;
pub type MeanStdF64 = stats::MeanStd<f64>;
pub type MeanStdF32 = stats::MeanStd<f32>;
pub type AdjectivePrecisionF64 = study::AdjectivePrecision<f64>;
pub type CohortMetricsF64 = study::CohortMetrics<f64>;
pub type EngagementF64 = engine::Engagement<f64>;
