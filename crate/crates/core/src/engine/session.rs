use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::prompt::{ChatMessage, Role};
use crate::study::QuestionnaireResponse;
use crate::{Locale, SatirStyle};

/// Sessions shorter than this (strictly) are excluded.
pub const MIN_SESSION_DURATION_SECS: i64 = 180;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Consented,
    Chatting,
    Questionnaire,
    Complete,
    Excluded,
}

impl SessionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SessionStatus::Consented => "consented",
            SessionStatus::Chatting => "chatting",
            SessionStatus::Questionnaire => "questionnaire",
            SessionStatus::Complete => "complete",
            SessionStatus::Excluded => "excluded",
        }
    }

    /// Whether `self → next` is a legal transition.
    pub fn can_become(self, next: SessionStatus) -> bool {
        use SessionStatus::*;
        matches!(
            (self, next),
            (Consented, Chatting)
                | (Chatting, Questionnaire)
                | (Questionnaire, Complete)
                | (Chatting | Questionnaire | Complete, Excluded)
        )
    }
}

impl fmt::Display for SessionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExclusionReason {
    TooShort { seconds: i64 },
    NoQuestionnaire,
    /// Set by an administrator, e.g. for a participant who did not take the
    /// study seriously.
    Manual { note: String },
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExclusionReason::TooShort { seconds } => write!(f, "too short ({seconds} s)"),
            ExclusionReason::NoQuestionnaire => f.write_str("no questionnaire"),
            ExclusionReason::Manual { note } => write!(f, "manual: {note}"),
        }
    }
}

/// One participant's run through the study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub(super) session_id: String,
    pub(super) participant_token: String,
    pub(super) script_id: String,
    pub(super) style: SatirStyle,
    pub(super) locale: Locale,
    pub(super) consent_at: DateTime<Utc>,
    /// Set by the first participant turn.
    pub(super) started_at: Option<DateTime<Utc>>,
    /// Set to the questionnaire submission time on completion.
    pub(super) ended_at: Option<DateTime<Utc>>,
    pub(super) transcript: Vec<ChatMessage>,
    pub(super) status: SessionStatus,
    pub(super) response: Option<QuestionnaireResponse>,
    pub(super) exclusion: Option<ExclusionReason>,
}

impl Session {
    pub fn session_id(&self) -> &str {
        &self.session_id
    }

    pub fn participant_token(&self) -> &str {
        &self.participant_token
    }

    pub fn script_id(&self) -> &str {
        &self.script_id
    }

    pub fn style(&self) -> SatirStyle {
        self.style
    }

    pub fn locale(&self) -> Locale {
        self.locale
    }

    pub fn consent_at(&self) -> DateTime<Utc> {
        self.consent_at
    }

    pub fn started_at(&self) -> Option<DateTime<Utc>> {
        self.started_at
    }

    pub fn ended_at(&self) -> Option<DateTime<Utc>> {
        self.ended_at
    }

    /// Raw transcript; assistant messages keep their annotations.
    pub fn transcript(&self) -> &[ChatMessage] {
        &self.transcript
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn response(&self) -> Option<&QuestionnaireResponse> {
        self.response.as_ref()
    }

    pub fn exclusion(&self) -> Option<&ExclusionReason> {
        self.exclusion.as_ref()
    }

    pub fn user_message_count(&self) -> usize {
        self.transcript.iter().filter(|m| m.role() == Role::User).count()
    }

    /// Seconds from the first chat turn to questionnaire submission.
    pub fn duration_secs(&self) -> Option<i64> {
        Some((self.ended_at? - self.started_at?).num_seconds())
    }

    pub fn duration_ms(&self) -> Option<i64> {
        Some((self.ended_at? - self.started_at?).num_milliseconds())
    }

    /// Checks the structural invariants; used when loading stored sessions.
    pub fn check(&self) -> Result<(), String> {
        for (i, message) in self.transcript.iter().enumerate() {
            let expected = if i % 2 == 0 { Role::Assistant } else { Role::User };
            if message.role() != expected {
                return Err(format!("transcript message {i} should be {expected}"));
            }
        }
        if let (Some(start), Some(end)) = (self.started_at, self.ended_at) {
            if end < start {
                return Err("ended_at precedes started_at".into());
            }
        }
        if self.status == SessionStatus::Excluded && self.exclusion.is_none() {
            return Err("excluded session without a reason".into());
        }
        Ok(())
    }
}
