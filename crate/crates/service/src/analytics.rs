//! Affect scoring of stored sessions and study metrics over cohorts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use vpsim_core::affect::{
    conversation_sentiment, dominant_sentiment, score_message, top_emotions, trigger_words, AffectError,
    AffectProvider, CohortAffect, EmotionProfile, MessageScore,
};
use vpsim_core::engine::{apply_exclusion_rules, engagement_stats, Engagement, EngineError, Session, SessionStatus};
use vpsim_core::prompt::Role;
use vpsim_core::study::{cohort_metrics, AdjectiveMap, CohortMetrics, MetricError, Questionnaire, QuestionnaireResponse};
use vpsim_core::SatirStyle;

use crate::store::{FileStore, RecordKind, StoreError};

/// Trigger words listed per top emotion.
pub const TRIGGER_WORDS_PER_EMOTION: usize = 5;

/// Persisted scores for the VP messages of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffectRecord {
    pub session_id: String,
    /// Transcript length when scored; a longer transcript means stale.
    pub transcript_len: usize,
    pub messages: Vec<MessageScore<f64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    #[error(transparent)]
    Affect(#[from] AffectError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Participant-visible text of every VP message, blank ones dropped.
pub fn vp_texts(session: &Session) -> Vec<String> {
    session
        .transcript()
        .iter()
        .filter(|m| m.role() == Role::Assistant)
        .map(|m| m.display_text())
        .filter(|t| !t.trim().is_empty())
        .collect()
}

/// Scores a session's VP messages, reusing the stored result when current.
pub async fn score_session(
    session: &Session,
    provider: &dyn AffectProvider,
    store: &FileStore,
) -> Result<AffectRecord, AnalyticsError> {
    match store.get::<AffectRecord>(RecordKind::AffectResult, session.session_id()) {
        Ok(record) if record.transcript_len == session.transcript().len() => return Ok(record),
        Ok(_) | Err(StoreError::NotFound { .. }) => {}
        Err(e) => return Err(e.into()),
    }
    let mut messages = Vec::new();
    for text in vp_texts(session) {
        messages.push(score_message(&text, session.locale(), provider).await?);
    }
    let record = AffectRecord {
        session_id: session.session_id().to_string(),
        transcript_len: session.transcript().len(),
        messages,
    };
    store.put(RecordKind::AffectResult, session.session_id(), &record)?;
    Ok(record)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionAffect {
    pub session_id: String,
    pub style: SatirStyle,
    pub messages: usize,
    pub top_emotions: Vec<(String, f64)>,
    /// Dominant sentiment level (1-9) per VP message.
    pub dominant_sentiment: Vec<u8>,
    pub conversation_sentiment: f64,
    pub trigger_words: BTreeMap<String, Vec<(String, f64)>>,
}

fn triggers(
    scored: &[MessageScore<f64>],
    top: &[(String, f64)],
) -> Result<BTreeMap<String, Vec<(String, f64)>>, AffectError> {
    top.iter()
        .map(|(emotion, _)| Ok((emotion.clone(), trigger_words(scored, emotion, TRIGGER_WORDS_PER_EMOTION)?)))
        .collect()
}

pub fn session_affect(session: &Session, record: &AffectRecord, k: usize) -> Result<SessionAffect, AffectError> {
    let profile = EmotionProfile::from_scores(session.session_id(), &record.messages)?;
    let top: Vec<(String, f64)> = top_emotions(&profile.vector, k)?
        .into_iter()
        .map(|(n, v)| (n.to_string(), v))
        .collect();
    Ok(SessionAffect {
        session_id: session.session_id().to_string(),
        style: session.style(),
        messages: record.messages.len(),
        dominant_sentiment: record.messages.iter().map(|m| dominant_sentiment(&m.sentiment).get()).collect(),
        conversation_sentiment: conversation_sentiment(&record.messages)?,
        trigger_words: triggers(&record.messages, &top)?,
        top_emotions: top,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleAffect {
    pub style: SatirStyle,
    pub session_ids: Vec<String>,
    #[serde(flatten)]
    pub summary: CohortAffect<f64>,
    pub trigger_words: BTreeMap<String, Vec<(String, f64)>>,
}

/// Sessions that count towards analysis: chatted, and not excluded once
/// the exclusion rules are applied.
pub fn analyzable(sessions: &[Session]) -> Vec<Session> {
    sessions
        .iter()
        .map(apply_exclusion_rules)
        .filter(|s| !matches!(s.status(), SessionStatus::Consented | SessionStatus::Excluded))
        .collect()
}

pub async fn style_affect(
    sessions: &[Session],
    style: SatirStyle,
    k: usize,
    provider: &dyn AffectProvider,
    store: &FileStore,
) -> Result<StyleAffect, AnalyticsError> {
    let mut cohort: Vec<Session> = analyzable(sessions).into_iter().filter(|s| s.style() == style).collect();
    cohort.sort_by(|a, b| a.session_id().cmp(b.session_id()));
    let mut conversations = Vec::with_capacity(cohort.len());
    for session in &cohort {
        conversations.push(score_session(session, provider, store).await?.messages);
    }
    let summary = CohortAffect::summarize(&conversations, k)?;
    let all: Vec<MessageScore<f64>> = conversations.into_iter().flatten().collect();
    Ok(StyleAffect {
        style,
        session_ids: cohort.iter().map(|s| s.session_id().to_string()).collect(),
        trigger_words: triggers(&all, &summary.top_emotions)?,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleMetrics {
    pub questionnaire: Option<CohortMetrics<f64>>,
    pub engagement: Option<Engagement<f64>>,
}

/// Questionnaire and engagement metrics per style over analyzable sessions.
pub fn study_metrics(
    sessions: &[Session],
    questionnaire: &Questionnaire,
    adjectives: &AdjectiveMap,
) -> Result<BTreeMap<SatirStyle, StyleMetrics>, AnalyticsError> {
    let kept = analyzable(sessions);
    let engagement = match engagement_stats::<f64>(&kept) {
        Ok(e) => e,
        Err(EngineError::EmptyInput) => BTreeMap::new(),
        Err(e) => return Err(e.into()),
    };
    let mut styles: Vec<SatirStyle> = kept.iter().map(|s| s.style()).collect();
    styles.sort();
    styles.dedup();
    let mut out = BTreeMap::new();
    for style in styles {
        let responses: Vec<QuestionnaireResponse> = kept
            .iter()
            .filter(|s| s.style() == style)
            .filter_map(|s| s.response().cloned())
            .collect();
        let questionnaire = if responses.is_empty() {
            None
        } else {
            Some(cohort_metrics(questionnaire, &responses, style, adjectives)?)
        };
        out.insert(
            style,
            StyleMetrics {
                questionnaire,
                engagement: engagement.get(&style).cloned(),
            },
        );
    }
    Ok(out)
}
