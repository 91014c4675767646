//! Session lifecycle: consent, balanced VP assignment, turns against the
//! gateway, questionnaire hand-off, exclusion rules and engagement stats.
//!
//! [`ConversationEngine`] holds the pure-ish operations: each takes a
//! session and returns an updated copy, so a failed provider call leaves the
//! caller's session untouched. [`SessionHub`] adds shared state on top: the
//! session table, the assignment ledger, the one-turn-per-session guard,
//! persistence through a [`SessionSink`] and the audit trail.

mod assignment;
mod clock;
mod conversation;
mod error;
mod export;
mod hub;
mod registry;
mod session;

pub use assignment::AssignmentLedger;
pub use clock::{Clock, IdSource, ManualClock, SeededIds, SystemClock, UuidIds};
pub use conversation::{apply_exclusion_rules, engagement_stats, ConversationEngine, Engagement, TurnOutcome};
pub use error::EngineError;
pub use export::{build_bundle, session_row, transcript_file};
pub use hub::{replay_statuses, AuditEvent, MemorySink, SessionHub, SessionSink};
pub use registry::{LoadedScript, ScriptRegistry};
pub use session::{ExclusionReason, Session, SessionStatus, MIN_SESSION_DURATION_SECS};
