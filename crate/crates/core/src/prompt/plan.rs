use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::strip_for_display;
use crate::script::CasePrompt;

/// Non-system messages that follow the author's note once the chat is long
/// enough, counting the current user message.
pub const NOTE_TRAILING_MESSAGES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    Assistant,
    User,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::Assistant => "assistant",
            Role::User => "user",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Scripted,
    Model,
    Participant,
    InjectedNote,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MessageError {
    #[error("message content must not be empty")]
    EmptyContent,
    #[error("a {role} message cannot have origin {origin:?}")]
    OriginMismatch { role: Role, origin: Origin },
}

/// One message as stored in a transcript and sent to the model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMessage")]
pub struct ChatMessage {
    role: Role,
    content: String,
    origin: Origin,
}

#[derive(Deserialize)]
struct RawMessage {
    role: Role,
    content: String,
    origin: Origin,
}

impl TryFrom<RawMessage> for ChatMessage {
    type Error = MessageError;

    fn try_from(raw: RawMessage) -> Result<Self, Self::Error> {
        ChatMessage::new(raw.role, raw.content, raw.origin)
    }
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>, origin: Origin) -> Result<Self, MessageError> {
        let content = content.into();
        if content.trim().is_empty() {
            return Err(MessageError::EmptyContent);
        }
        let consistent = match (role, origin) {
            (Role::User, Origin::Participant) => true,
            (Role::User, _) | (_, Origin::Participant) => false,
            (Role::System, Origin::InjectedNote | Origin::Scripted) => true,
            (_, Origin::InjectedNote) => false,
            (Role::System, Origin::Model) => false,
            (Role::Assistant, Origin::Scripted | Origin::Model) => true,
        };
        if !consistent {
            return Err(MessageError::OriginMismatch { role, origin });
        }
        Ok(Self {
            role,
            content,
            origin,
        })
    }

    pub fn participant(text: impl Into<String>) -> Result<Self, MessageError> {
        Self::new(Role::User, text, Origin::Participant)
    }

    pub fn model_reply(text: impl Into<String>) -> Result<Self, MessageError> {
        Self::new(Role::Assistant, text, Origin::Model)
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn content(&self) -> &str {
        &self.content
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    /// What a participant may see of this message.
    pub fn display_text(&self) -> String {
        match self.role {
            Role::Assistant => {
                strip_for_display(&self.content).unwrap_or_else(|_| String::new())
            }
            _ => self.content.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("current user text must not be empty")]
    EmptyUserText,
    #[error("history message {index} is a system message")]
    SystemInHistory { index: usize },
    #[error("history message {index} should be {expected}, found {found}")]
    Alternation {
        index: usize,
        expected: Role,
        found: Role,
    },
    #[error("plan invariant broken: {0}")]
    Invariant(String),
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: Role,
    content: &'a str,
}

/// The ordered messages sent to the model for one turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptPlan {
    messages: Vec<ChatMessage>,
    note_index: usize,
}

impl PromptPlan {
    /// Wraps `messages`, checking every plan invariant.
    pub fn from_messages(messages: Vec<ChatMessage>) -> Result<Self, PlanError> {
        let notes: Vec<usize> = messages
            .iter()
            .enumerate()
            .filter(|(_, m)| m.origin == Origin::InjectedNote)
            .map(|(i, _)| i)
            .collect();
        let [note_index] = notes[..] else {
            return Err(PlanError::Invariant(format!(
                "expected exactly one injected note, found {}",
                notes.len()
            )));
        };
        match messages.first() {
            Some(m) if m.role == Role::System && m.origin == Origin::Scripted => {}
            _ => {
                return Err(PlanError::Invariant(
                    "first message must be the short-case system message".into(),
                ))
            }
        }
        if messages.last().map(|m| m.role) != Some(Role::User) {
            return Err(PlanError::Invariant("last message must be a user message".into()));
        }
        let non_system: Vec<&ChatMessage> =
            messages.iter().filter(|m| m.role != Role::System).collect();
        check_alternation(&non_system)?;
        Ok(Self {
            messages,
            note_index,
        })
    }

    pub fn messages(&self) -> &[ChatMessage] {
        &self.messages
    }

    pub fn note_index(&self) -> usize {
        self.note_index
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// Non-system messages after the injected note.
    pub fn messages_after_note(&self) -> usize {
        self.messages[self.note_index + 1..]
            .iter()
            .filter(|m| m.role != Role::System)
            .count()
    }

    /// Compact `[{"role":..,"content":..}, ..]` JSON; the byte-stable form
    /// used for fingerprints and golden files.
    pub fn canonical_json(&self) -> String {
        let wire: Vec<WireMessage<'_>> = self
            .messages
            .iter()
            .map(|m| WireMessage {
                role: m.role,
                content: &m.content,
            })
            .collect();
        serde_json::to_string(&wire).expect("plain strings always serialize")
    }

    /// Lowercase hex SHA-256 of [`Self::canonical_json`].
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

fn check_alternation(messages: &[&ChatMessage]) -> Result<(), PlanError> {
    for (index, message) in messages.iter().enumerate() {
        let expected = if index % 2 == 0 {
            Role::Assistant
        } else {
            Role::User
        };
        if message.role != expected {
            return Err(PlanError::Alternation {
                index,
                expected,
                found: message.role,
            });
        }
    }
    Ok(())
}

/// Insertion point of the author's note among the non-system messages.
pub fn note_position(n_nonsystem: usize) -> usize {
    n_nonsystem.saturating_sub(NOTE_TRAILING_MESSAGES)
}

fn short_case_message(case: &CasePrompt) -> ChatMessage {
    ChatMessage::new(Role::System, case.short_case.clone(), Origin::Scripted)
        .expect("rendered short case is never empty")
}

fn note_message(case: &CasePrompt) -> ChatMessage {
    ChatMessage::new(Role::System, case.full_case.clone(), Origin::InjectedNote)
        .expect("rendered author's note is never empty")
}

fn opening_message(case: &CasePrompt) -> ChatMessage {
    ChatMessage::new(Role::Assistant, case.opening.to_raw(), Origin::Scripted)
        .expect("validated starting message is never empty")
}

/// Builds the plan for one turn. An empty history starts with the scripted
/// opening message.
pub fn assemble(
    case: &CasePrompt,
    history: &[ChatMessage],
    current_user_text: &str,
) -> Result<PromptPlan, PlanError> {
    if current_user_text.trim().is_empty() {
        return Err(PlanError::EmptyUserText);
    }
    if let Some(index) = history.iter().position(|m| m.role == Role::System) {
        return Err(PlanError::SystemInHistory { index });
    }

    let mut turns: Vec<ChatMessage> = Vec::with_capacity(history.len() + 2);
    if history.is_empty() {
        turns.push(opening_message(case));
    } else {
        turns.extend_from_slice(history);
    }
    turns.push(ChatMessage::participant(current_user_text).map_err(|_| PlanError::EmptyUserText)?);
    check_alternation(&turns.iter().collect::<Vec<_>>())?;

    let insert_at = note_position(turns.len());
    let mut messages = Vec::with_capacity(turns.len() + 2);
    messages.push(short_case_message(case));
    for (i, message) in turns.into_iter().enumerate() {
        if i == insert_at {
            messages.push(note_message(case));
        }
        messages.push(message);
    }
    PromptPlan::from_messages(messages)
}

/// The first three plan messages (short case, note, scripted opening) and the
/// opening as a participant sees it.
pub fn build_opening(case: &CasePrompt) -> (Vec<ChatMessage>, String) {
    let messages = vec![
        short_case_message(case),
        note_message(case),
        opening_message(case),
    ];
    (messages, case.opening.visible_text().to_string())
}
