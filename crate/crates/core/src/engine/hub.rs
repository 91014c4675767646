use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, Mutex, MutexGuard};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{apply_exclusion_rules, AssignmentLedger, ConversationEngine, EngineError, Session, SessionStatus, TurnOutcome};
use crate::study::{Answer, Questionnaire};
use crate::{Locale, SatirStyle};

/// One recorded status change; `from` is `None` for creation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEvent {
    pub seq: u64,
    pub at: DateTime<Utc>,
    pub session_id: String,
    pub from: Option<SessionStatus>,
    pub to: SessionStatus,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

/// Final status per session reconstructed from an audit trail.
pub fn replay_statuses(events: &[AuditEvent]) -> BTreeMap<String, SessionStatus> {
    let mut ordered: Vec<&AuditEvent> = events.iter().collect();
    ordered.sort_by_key(|e| e.seq);
    let mut statuses = BTreeMap::new();
    for event in ordered {
        statuses.insert(event.session_id.clone(), event.to);
    }
    statuses
}

/// Durable storage behind the hub. Each call must be durable before it
/// returns; the hub only updates memory after a successful write.
pub trait SessionSink: Send + Sync {
    fn save_session(&self, session: &Session) -> Result<(), String>;
    fn append_audit(&self, event: &AuditEvent) -> Result<(), String>;
    fn save_ledger(&self, ledger: &AssignmentLedger) -> Result<(), String>;
}

/// In-memory sink for tests and demos.
#[derive(Debug, Default)]
pub struct MemorySink {
    pub sessions: Mutex<HashMap<String, Session>>,
    pub audit: Mutex<Vec<AuditEvent>>,
    pub ledger: Mutex<Option<AssignmentLedger>>,
}

impl SessionSink for MemorySink {
    fn save_session(&self, session: &Session) -> Result<(), String> {
        self.sessions
            .lock()
            .map_err(|e| e.to_string())?
            .insert(session.session_id.clone(), session.clone());
        Ok(())
    }

    fn append_audit(&self, event: &AuditEvent) -> Result<(), String> {
        self.audit.lock().map_err(|e| e.to_string())?.push(event.clone());
        Ok(())
    }

    fn save_ledger(&self, ledger: &AssignmentLedger) -> Result<(), String> {
        *self.ledger.lock().map_err(|e| e.to_string())? = Some(ledger.clone());
        Ok(())
    }
}

struct HubState {
    sessions: BTreeMap<String, Session>,
    ledger: AssignmentLedger,
    in_flight: HashSet<String>,
    audit_seq: u64,
}

/// Shared, persistent front of the engine. Turns on one session are
/// serialized: a second turn, or any other change, while a turn is in flight
/// is rejected with [`EngineError::TurnInFlight`].
pub struct SessionHub {
    engine: ConversationEngine,
    questionnaires: BTreeMap<Locale, Arc<Questionnaire>>,
    sink: Arc<dyn SessionSink>,
    state: Mutex<HubState>,
}

struct InFlight<'a> {
    hub: &'a SessionHub,
    session_id: String,
}

impl Drop for InFlight<'_> {
    fn drop(&mut self) {
        self.hub.lock().in_flight.remove(&self.session_id);
    }
}

impl SessionHub {
    pub fn new(
        engine: ConversationEngine,
        questionnaires: impl IntoIterator<Item = Questionnaire>,
        ledger: AssignmentLedger,
        sink: Arc<dyn SessionSink>,
    ) -> Self {
        Self {
            engine,
            questionnaires: questionnaires.into_iter().map(|q| (q.locale, Arc::new(q))).collect(),
            sink,
            state: Mutex::new(HubState {
                sessions: BTreeMap::new(),
                ledger,
                in_flight: HashSet::new(),
                audit_seq: 0,
            }),
        }
    }

    /// Loads previously persisted sessions; audit numbering continues after
    /// `last_audit_seq`.
    pub fn restore(&self, sessions: impl IntoIterator<Item = Session>, last_audit_seq: u64) -> Result<usize, EngineError> {
        let mut state = self.lock();
        let mut n = 0;
        for session in sessions {
            session
                .check()
                .map_err(|e| EngineError::Storage(format!("session {}: {e}", session.session_id)))?;
            state.sessions.insert(session.session_id.clone(), session);
            n += 1;
        }
        state.audit_seq = state.audit_seq.max(last_audit_seq);
        Ok(n)
    }

    fn lock(&self) -> MutexGuard<'_, HubState> {
        self.state.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    pub fn engine(&self) -> &ConversationEngine {
        &self.engine
    }

    pub fn questionnaire(&self, locale: Locale) -> Option<Arc<Questionnaire>> {
        self.questionnaires.get(&locale).cloned()
    }

    pub fn ledger(&self) -> AssignmentLedger {
        self.lock().ledger.clone()
    }

    pub fn get(&self, session_id: &str) -> Result<Session, EngineError> {
        self.lock()
            .sessions
            .get(session_id)
            .cloned()
            .ok_or_else(|| EngineError::NotFound(session_id.to_string()))
    }

    pub fn list(&self) -> Vec<Session> {
        self.lock().sessions.values().cloned().collect()
    }

    pub fn sessions_for_style(&self, style: SatirStyle) -> Vec<Session> {
        self.lock().sessions.values().filter(|s| s.style == style).cloned().collect()
    }

    /// Persists `next` plus an audit event if its status changed, then
    /// replaces the in-memory copy.
    fn commit(&self, state: &mut HubState, previous: Option<SessionStatus>, next: Session, detail: &str) -> Result<Session, EngineError> {
        if let Some(from) = previous {
            if from != next.status && !from.can_become(next.status) {
                return Err(EngineError::InvalidState {
                    op: "change status",
                    status: from,
                });
            }
        }
        let storage = |e: String| EngineError::Storage(e);
        self.sink.save_session(&next).map_err(storage)?;
        if previous != Some(next.status) {
            let event = AuditEvent {
                seq: state.audit_seq + 1,
                at: self.engine.clock().now(),
                session_id: next.session_id.clone(),
                from: previous,
                to: next.status,
                detail: detail.to_string(),
            };
            self.sink.append_audit(&event).map_err(storage)?;
            state.audit_seq = event.seq;
        }
        state.sessions.insert(next.session_id.clone(), next.clone());
        Ok(next)
    }

    pub fn create_session(&self, locale: Locale, forced_style: Option<SatirStyle>) -> Result<Session, EngineError> {
        let mut state = self.lock();
        let mut ledger = state.ledger.clone();
        let session = self.engine.create_session(locale, &mut ledger, forced_style)?;
        self.sink.save_ledger(&ledger).map_err(EngineError::Storage)?;
        state.ledger = ledger;
        self.commit(&mut state, None, session, "consent")
    }

    fn idle_session(&self, state: &HubState, session_id: &str) -> Result<Session, EngineError> {
        if state.in_flight.contains(session_id) {
            return Err(EngineError::TurnInFlight);
        }
        state
            .sessions
            .get(session_id)
            .cloned()
            .ok_or_else(|| EngineError::NotFound(session_id.to_string()))
    }

    pub async fn post_message(&self, session_id: &str, text: &str) -> Result<TurnOutcome, EngineError> {
        let session = {
            let mut state = self.lock();
            let session = self.idle_session(&state, session_id)?;
            state.in_flight.insert(session_id.to_string());
            session
        };
        let _guard = InFlight {
            hub: self,
            session_id: session_id.to_string(),
        };
        let outcome = self.engine.post_user_message(&session, text).await?;
        let mut state = self.lock();
        let committed = self.commit(&mut state, Some(session.status), outcome.session, "first turn")?;
        Ok(TurnOutcome {
            session: committed,
            ..outcome
        })
    }

    pub fn finish_chat(&self, session_id: &str) -> Result<Session, EngineError> {
        let mut state = self.lock();
        let session = self.idle_session(&state, session_id)?;
        let next = self.engine.finish_chat(&session)?;
        self.commit(&mut state, Some(session.status), next, "finish chat")
    }

    /// Records the questionnaire and completes the session in one step.
    pub fn submit_questionnaire(&self, session_id: &str, answers: BTreeMap<String, Answer>) -> Result<Session, EngineError> {
        let mut state = self.lock();
        let session = self.idle_session(&state, session_id)?;
        let questionnaire = self
            .questionnaire(session.locale)
            .ok_or_else(|| EngineError::NotFound(format!("questionnaire for {}", session.locale)))?;
        let recorded = self.engine.record_response(&session, &questionnaire, answers)?;
        let completed = self.engine.complete_session(&recorded)?;
        self.commit(&mut state, Some(session.status), completed, "questionnaire submitted")
    }

    pub fn exclude(&self, session_id: &str, note: &str) -> Result<Session, EngineError> {
        let mut state = self.lock();
        let session = self.idle_session(&state, session_id)?;
        let next = self.engine.exclude_manually(&session, note)?;
        self.commit(&mut state, Some(session.status), next, "manual exclusion")
    }

    /// Applies the exclusion rules to every idle session; returns the newly
    /// excluded ones.
    pub fn apply_exclusions(&self) -> Result<Vec<Session>, EngineError> {
        let mut state = self.lock();
        let candidates: Vec<Session> = state
            .sessions
            .values()
            .filter(|s| !state.in_flight.contains(&s.session_id))
            .cloned()
            .collect();
        let mut changed = Vec::new();
        for session in candidates {
            let next = apply_exclusion_rules(&session);
            if next.status != session.status {
                let detail = next.exclusion.as_ref().map(ToString::to_string).unwrap_or_default();
                changed.push(self.commit(&mut state, Some(session.status), next, &detail)?);
            }
        }
        Ok(changed)
    }
}
