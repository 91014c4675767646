//! Export bundle layout:
//!
//! ```text
//! <dir>/sessions.csv            one row per session, excluded ones flagged
//! <dir>/responses.csv           one row per (session, item) answer
//! <dir>/metrics.json            computed metrics
//! <dir>/transcripts/<id>.json   raw transcript, annotations preserved
//! ```
//!
//! Rows are sorted by session id, so equal input gives byte-identical files.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::response::QuestionnaireResponse;
use crate::prompt::ChatMessage;
use crate::{Locale, SatirStyle};

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("cannot encode {path}: {detail}")]
    Encode { path: PathBuf, detail: String },
}

/// Flat session record; only the random participant token links sessions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRow {
    pub session_id: String,
    pub participant_token: String,
    pub style: SatirStyle,
    pub script_id: String,
    pub locale: Locale,
    pub status: String,
    pub excluded: bool,
    pub exclusion_reason: String,
    pub consent_at: String,
    pub started_at: String,
    pub ended_at: String,
    pub user_messages: usize,
    pub minutes: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptFile {
    pub session_id: String,
    pub participant_token: String,
    pub script_id: String,
    pub messages: Vec<ChatMessage>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExportBundle {
    pub sessions: Vec<SessionRow>,
    pub transcripts: Vec<TranscriptFile>,
    pub responses: Vec<QuestionnaireResponse>,
    pub metrics: serde_json::Value,
}

#[derive(Serialize)]
struct ResponseRow<'a> {
    session_id: &'a str,
    questionnaire_version: &'a str,
    submitted_at: String,
    item_id: &'a str,
    answer_type: &'static str,
    value: String,
}

pub fn export_timestamp(at: &DateTime<Utc>) -> String {
    at.to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExportError + '_ {
    move |source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_csv<S: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = S>) -> Result<(), ExportError> {
    let encode = |e: csv::Error| ExportError::Encode {
        path: path.to_path_buf(),
        detail: e.to_string(),
    };
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    writer.write_record(header).map_err(encode)?;
    for row in rows {
        writer.serialize(row).map_err(encode)?;
    }
    let bytes = writer.into_inner().map_err(|e| ExportError::Encode {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    fs::write(path, bytes).map_err(io_err(path))
}

const SESSION_HEADER: [&str; 13] = [
    "session_id",
    "participant_token",
    "style",
    "script_id",
    "locale",
    "status",
    "excluded",
    "exclusion_reason",
    "consent_at",
    "started_at",
    "ended_at",
    "user_messages",
    "minutes",
];

const RESPONSE_HEADER: [&str; 6] = [
    "session_id",
    "questionnaire_version",
    "submitted_at",
    "item_id",
    "answer_type",
    "value",
];

/// Writes `bundle` under `dir`, replacing earlier export files.
pub fn write_bundle(bundle: &ExportBundle, dir: &Path) -> Result<(), ExportError> {
    let transcripts_dir = dir.join("transcripts");
    if transcripts_dir.exists() {
        fs::remove_dir_all(&transcripts_dir).map_err(io_err(&transcripts_dir))?;
    }
    fs::create_dir_all(&transcripts_dir).map_err(io_err(&transcripts_dir))?;

    let mut sessions = bundle.sessions.clone();
    sessions.sort_by(|a, b| a.session_id.cmp(&b.session_id));
    write_csv(&dir.join("sessions.csv"), &SESSION_HEADER, &sessions)?;

    let mut responses: Vec<&QuestionnaireResponse> = bundle.responses.iter().collect();
    responses.sort_by(|a, b| a.session_id.cmp(&b.session_id));
    let rows = responses.iter().flat_map(|r| {
        r.answers.iter().map(|(item_id, answer)| ResponseRow {
            session_id: &r.session_id,
            questionnaire_version: &r.questionnaire_version,
            submitted_at: export_timestamp(&r.submitted_at),
            item_id,
            answer_type: answer.type_name(),
            value: answer.export_value(),
        })
    });
    write_csv(&dir.join("responses.csv"), &RESPONSE_HEADER, rows)?;

    let metrics_path = dir.join("metrics.json");
    let metrics = serde_json::to_string_pretty(&bundle.metrics).map_err(|e| ExportError::Encode {
        path: metrics_path.clone(),
        detail: e.to_string(),
    })?;
    fs::write(&metrics_path, metrics + "\n").map_err(io_err(&metrics_path))?;

    for transcript in &bundle.transcripts {
        let path = transcripts_dir.join(format!("{}.json", transcript.session_id));
        let json = serde_json::to_string_pretty(transcript).map_err(|e| ExportError::Encode {
            path: path.clone(),
            detail: e.to_string(),
        })?;
        fs::write(&path, json + "\n").map_err(io_err(&path))?;
    }
    Ok(())
}
