use super::{apply_exclusion_rules, Session, SessionStatus};
use crate::study::{ExportBundle, SessionRow, TranscriptFile};

fn ts(at: Option<chrono::DateTime<chrono::Utc>>) -> String {
    at.map(|t| crate::study::export_timestamp(&t)).unwrap_or_default()
}

/// Export row; `excluded` reflects the exclusion rules even when they have
/// not been persisted yet.
pub fn session_row(session: &Session) -> SessionRow {
    let effective = apply_exclusion_rules(session);
    let minutes = session
        .duration_ms()
        .map(|ms| format!("{:.3}", ms as f64 / 60_000.0))
        .unwrap_or_default();
    SessionRow {
        session_id: session.session_id.clone(),
        participant_token: session.participant_token.clone(),
        style: session.style,
        script_id: session.script_id.clone(),
        locale: session.locale,
        status: session.status.to_string(),
        excluded: effective.status == SessionStatus::Excluded,
        exclusion_reason: effective.exclusion.map(|r| r.to_string()).unwrap_or_default(),
        consent_at: ts(Some(session.consent_at)),
        started_at: ts(session.started_at),
        ended_at: ts(session.ended_at),
        user_messages: session.user_message_count(),
        minutes,
    }
}

pub fn transcript_file(session: &Session) -> TranscriptFile {
    TranscriptFile {
        session_id: session.session_id.clone(),
        participant_token: session.participant_token.clone(),
        script_id: session.script_id.clone(),
        messages: session.transcript.clone(),
    }
}

/// Bundle over every session, sorted by session id.
pub fn build_bundle(sessions: &[Session], metrics: serde_json::Value) -> ExportBundle {
    let mut sorted: Vec<&Session> = sessions.iter().collect();
    sorted.sort_by(|a, b| a.session_id.cmp(&b.session_id));
    ExportBundle {
        sessions: sorted.iter().map(|s| session_row(s)).collect(),
        transcripts: sorted.iter().map(|s| transcript_file(s)).collect(),
        responses: sorted.iter().filter_map(|s| s.response.clone()).collect(),
        metrics,
    }
}
