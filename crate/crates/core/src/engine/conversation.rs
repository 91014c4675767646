use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::Duration;
use serde::{Deserialize, Serialize};

use super::{AssignmentLedger, Clock, EngineError, ExclusionReason, IdSource, ScriptRegistry, Session, SessionStatus, MIN_SESSION_DURATION_SECS};
use crate::gateway::{complete_chat, ChatProvider, GatewayError, GatewayErrorKind, ProviderConfig};
use crate::prompt::{assemble, build_opening, strip_for_display, ChatMessage};
use crate::stats::{mean_std, MeanStd};
use crate::study::{Answer, Questionnaire, QuestionnaireResponse};
use crate::{Locale, SatirStyle, Scalar};

/// Result of a committed participant turn.
#[derive(Debug, Clone)]
pub struct TurnOutcome {
    /// The reply as the participant sees it.
    pub display_reply: String,
    pub session: Session,
    /// Provider calls made for this turn.
    pub attempts: u32,
}

pub struct ConversationEngine {
    registry: Arc<ScriptRegistry>,
    provider: Arc<dyn ChatProvider>,
    provider_config: ProviderConfig,
    clock: Arc<dyn Clock>,
    ids: Arc<dyn IdSource>,
}

fn require(op: &'static str, session: &Session, allowed: &[SessionStatus]) -> Result<(), EngineError> {
    if allowed.contains(&session.status) {
        Ok(())
    } else {
        Err(EngineError::InvalidState {
            op,
            status: session.status,
        })
    }
}

impl ConversationEngine {
    pub fn new(
        registry: Arc<ScriptRegistry>,
        provider: Arc<dyn ChatProvider>,
        provider_config: ProviderConfig,
        clock: Arc<dyn Clock>,
        ids: Arc<dyn IdSource>,
    ) -> Self {
        Self {
            registry,
            provider,
            provider_config,
            clock,
            ids,
        }
    }

    pub fn registry(&self) -> &ScriptRegistry {
        &self.registry
    }

    pub fn clock(&self) -> &dyn Clock {
        self.clock.as_ref()
    }

    /// Creates a consented session with the scripted opening as its first
    /// message, assigning the least-used style unless one is forced.
    pub fn create_session(
        &self,
        locale: Locale,
        ledger: &mut AssignmentLedger,
        forced_style: Option<SatirStyle>,
    ) -> Result<Session, EngineError> {
        let available = self.registry.styles(locale);
        if available.is_empty() {
            return Err(EngineError::NoScript(locale));
        }
        let style = match forced_style {
            Some(style) if available.contains(&style) && ledger.contains(style) => style,
            Some(style) => return Err(EngineError::UnknownStyle { style, locale }),
            None => ledger.pick(Some(&available)).ok_or(EngineError::NoScript(locale))?,
        };
        let loaded = self
            .registry
            .get(style, locale)
            .ok_or(EngineError::UnknownStyle { style, locale })?;
        let (opening, _) = build_opening(&loaded.case);
        let first = opening.last().cloned().expect("opening has three messages");
        ledger.record(style);
        Ok(Session {
            session_id: self.ids.next_id(),
            participant_token: self.ids.next_id(),
            script_id: loaded.script.script_id.0.clone(),
            style,
            locale,
            consent_at: self.clock.now(),
            started_at: None,
            ended_at: None,
            transcript: vec![first],
            status: SessionStatus::Consented,
            response: None,
            exclusion: None,
        })
    }

    /// Runs one turn. On any error the caller's session is unchanged; on
    /// success the user message and raw reply are committed together.
    pub async fn post_user_message(&self, session: &Session, text: &str) -> Result<TurnOutcome, EngineError> {
        require("post a message", session, &[SessionStatus::Consented, SessionStatus::Chatting])?;
        if text.trim().is_empty() {
            return Err(EngineError::EmptyText);
        }
        let loaded = self
            .registry
            .by_id(&session.script_id)
            .ok_or_else(|| EngineError::NotFound(format!("script {}", session.script_id)))?;
        let turn_started = self.clock.now();
        let plan = assemble(&loaded.case, &session.transcript, text)?;
        let completion = complete_chat(self.provider.as_ref(), &plan, &self.provider_config).await?;

        let malformed = |detail: String| GatewayError::new(GatewayErrorKind::MalformedResponse, detail);
        let display_reply = strip_for_display(&completion.content)
            .map_err(|e| malformed(format!("reply breaks annotation grammar: {e}")))?;
        let reply = ChatMessage::model_reply(completion.content).map_err(|e| malformed(e.to_string()))?;
        let user = ChatMessage::participant(text).map_err(|_| EngineError::EmptyText)?;

        let mut next = session.clone();
        next.transcript.push(user);
        next.transcript.push(reply);
        next.status = SessionStatus::Chatting;
        next.started_at.get_or_insert(turn_started);
        Ok(TurnOutcome {
            display_reply,
            session: next,
            attempts: completion.attempts,
        })
    }

    pub fn finish_chat(&self, session: &Session) -> Result<Session, EngineError> {
        require("finish the chat", session, &[SessionStatus::Chatting])?;
        let mut next = session.clone();
        next.status = SessionStatus::Questionnaire;
        Ok(next)
    }

    /// Validates and stores the questionnaire answers.
    pub fn record_response(
        &self,
        session: &Session,
        questionnaire: &Questionnaire,
        answers: BTreeMap<String, Answer>,
    ) -> Result<Session, EngineError> {
        require("submit a questionnaire", session, &[SessionStatus::Questionnaire])?;
        let response = QuestionnaireResponse::new(questionnaire, &session.session_id, answers, self.clock.now())?;
        let mut next = session.clone();
        next.response = Some(response);
        Ok(next)
    }

    pub fn complete_session(&self, session: &Session) -> Result<Session, EngineError> {
        require("complete the session", session, &[SessionStatus::Questionnaire])?;
        let Some(response) = &session.response else {
            return Err(EngineError::InvalidState {
                op: "complete the session without a questionnaire response",
                status: session.status,
            });
        };
        let mut next = session.clone();
        next.ended_at = Some(response.submitted_at);
        next.status = SessionStatus::Complete;
        Ok(next)
    }

    /// Manual exclusion flag for sessions past the chat start.
    pub fn exclude_manually(&self, session: &Session, note: &str) -> Result<Session, EngineError> {
        require(
            "exclude",
            session,
            &[SessionStatus::Chatting, SessionStatus::Questionnaire, SessionStatus::Complete],
        )?;
        let mut next = session.clone();
        next.status = SessionStatus::Excluded;
        next.exclusion = Some(ExclusionReason::Manual { note: note.to_string() });
        Ok(next)
    }
}

/// Marks a session excluded when it has no questionnaire response or lasted
/// under three minutes. Sessions that never started chatting, and sessions
/// already excluded, are returned unchanged.
pub fn apply_exclusion_rules(session: &Session) -> Session {
    let mut next = session.clone();
    if matches!(session.status, SessionStatus::Consented | SessionStatus::Excluded) {
        return next;
    }
    let reason = if session.response.is_none() {
        Some(ExclusionReason::NoQuestionnaire)
    } else {
        match (session.started_at, session.ended_at) {
            (Some(start), Some(end)) if end - start < Duration::seconds(MIN_SESSION_DURATION_SECS) => {
                Some(ExclusionReason::TooShort {
                    seconds: (end - start).num_seconds(),
                })
            }
            _ => None,
        }
    };
    if let Some(reason) = reason {
        next.status = SessionStatus::Excluded;
        next.exclusion = Some(reason);
    }
    next
}

/// Messages and minutes per session for one style.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Engagement<T> {
    pub sessions: usize,
    /// Participant messages per session.
    pub messages: MeanStd<T>,
    pub minutes: MeanStd<T>,
}

/// Engagement per style over finished, non-excluded sessions.
pub fn engagement_stats<T: Scalar>(sessions: &[Session]) -> Result<BTreeMap<SatirStyle, Engagement<T>>, EngineError> {
    let mut by_style: BTreeMap<SatirStyle, (Vec<T>, Vec<T>)> = BTreeMap::new();
    for session in sessions {
        if session.status == SessionStatus::Excluded {
            continue;
        }
        let (Some(start), Some(end)) = (session.started_at, session.ended_at) else {
            continue;
        };
        let minutes = (end - start).num_milliseconds() as f64 / 60_000.0;
        let entry = by_style.entry(session.style).or_default();
        entry.0.push(T::of_usize(session.user_message_count()));
        entry.1.push(T::of(minutes));
    }
    if by_style.is_empty() {
        return Err(EngineError::EmptyInput);
    }
    Ok(by_style
        .into_iter()
        .map(|(style, (messages, minutes))| {
            let engagement = Engagement {
                sessions: messages.len(),
                messages: mean_std(&messages).expect("non-empty"),
                minutes: mean_std(&minutes).expect("non-empty"),
            };
            (style, engagement)
        })
        .collect())
}
