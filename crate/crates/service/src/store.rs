//! File-backed storage.
//!
//! ```text
//! <storage>/manifest.toml              category manifest
//! <storage>/scripts/*.toml             illness scripts
//! <storage>/questionnaires/<loc>.toml  questionnaire definitions
//! <storage>/adjectives.toml            adjective → style map
//! <storage>/records/sessions/<id>.json
//! <storage>/records/audit/<seq>.json   zero-padded sequence number
//! <storage>/records/affect/<id>.json
//! <storage>/ledger.json                assignment counts
//! ```
//!
//! Every record is written to a temporary file, synced and renamed into
//! place, so a crash leaves either the previous or the new version.

use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use vpsim_core::engine::{AssignmentLedger, AuditEvent, Session, SessionSink};
use vpsim_core::{bundled, Locale};

pub const RECORD_VERSION: u32 = 1;
const TMP_SUFFIX: &str = ".tmp";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    /// A session with its transcript and questionnaire response.
    Session,
    AffectResult,
    AuditEvent,
}

impl RecordKind {
    fn dir(self) -> &'static str {
        match self {
            RecordKind::Session => "sessions",
            RecordKind::AffectResult => "affect",
            RecordKind::AuditEvent => "audit",
        }
    }
}

/// Envelope around every persisted document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredRecord {
    pub kind: RecordKind,
    pub version: u32,
    pub id: String,
    pub payload: serde_json::Value,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{kind:?} record `{id}` not found")]
    NotFound { kind: RecordKind, id: String },
    #[error("storage I/O on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("corrupt record {path}: {detail}")]
    Corrupt { path: PathBuf, detail: String },
    #[error("invalid record id `{0}`")]
    InvalidId(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Ids become file names, so only a conservative alphabet is allowed.
fn check_id(id: &str) -> Result<(), StoreError> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(StoreError::InvalidId(id.to_string()))
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().expect("record paths have a parent");
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut tmp_name = path.file_name().expect("file name").to_os_string();
    tmp_name.push(TMP_SUFFIX);
    let tmp = dir.join(tmp_name);
    {
        let mut file = File::create(&tmp).map_err(io_err(&tmp))?;
        file.write_all(bytes).map_err(io_err(&tmp))?;
        file.sync_all().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))?;
    // Directory sync makes the rename durable; not supported everywhere.
    if let Ok(d) = File::open(dir) {
        let _ = d.sync_all();
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct FileStore {
    root: PathBuf,
}

impl FileStore {
    /// Opens `root`, creating the record directories and discarding
    /// half-written temporary files from an interrupted write.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let store = Self { root: root.into() };
        for kind in [RecordKind::Session, RecordKind::AffectResult, RecordKind::AuditEvent] {
            let dir = store.kind_dir(kind);
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
            for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
                let path = entry.map_err(io_err(&dir))?.path();
                if path.to_string_lossy().ends_with(TMP_SUFFIX) {
                    fs::remove_file(&path).map_err(io_err(&path))?;
                }
            }
        }
        let probe = store.root.join(".write-probe");
        fs::write(&probe, b"").map_err(io_err(&probe))?;
        fs::remove_file(&probe).map_err(io_err(&probe))?;
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn kind_dir(&self, kind: RecordKind) -> PathBuf {
        self.root.join("records").join(kind.dir())
    }

    fn record_path(&self, kind: RecordKind, id: &str) -> PathBuf {
        self.kind_dir(kind).join(format!("{id}.json"))
    }

    /// Durable once this returns.
    pub fn persist(&self, record: &StoredRecord) -> Result<(), StoreError> {
        check_id(&record.id)?;
        let path = self.record_path(record.kind, &record.id);
        let bytes = serde_json::to_vec_pretty(record).map_err(|e| StoreError::Corrupt {
            path: path.clone(),
            detail: e.to_string(),
        })?;
        write_atomic(&path, &bytes)
    }

    pub fn load(&self, kind: RecordKind, id: &str) -> Result<StoredRecord, StoreError> {
        check_id(id)?;
        let path = self.record_path(kind, id);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound {
                    kind,
                    id: id.to_string(),
                })
            }
            Err(e) => return Err(io_err(&path)(e)),
        };
        let record: StoredRecord = serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt {
            path: path.clone(),
            detail: e.to_string(),
        })?;
        if record.kind != kind || record.id != id || record.version != RECORD_VERSION {
            return Err(StoreError::Corrupt {
                path,
                detail: format!("envelope mismatch: {:?} {} v{}", record.kind, record.id, record.version),
            });
        }
        Ok(record)
    }

    pub fn ids(&self, kind: RecordKind) -> Result<Vec<String>, StoreError> {
        let dir = self.kind_dir(kind);
        let mut ids = Vec::new();
        for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let path = entry.map_err(io_err(&dir))?.path();
            if path.extension().and_then(|e| e.to_str()) == Some("json") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    ids.push(stem.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn put<T: Serialize>(&self, kind: RecordKind, id: &str, payload: &T) -> Result<(), StoreError> {
        let payload = serde_json::to_value(payload).map_err(|e| StoreError::Corrupt {
            path: self.record_path(kind, id),
            detail: e.to_string(),
        })?;
        self.persist(&StoredRecord {
            kind,
            version: RECORD_VERSION,
            id: id.to_string(),
            payload,
        })
    }

    pub fn get<T: DeserializeOwned>(&self, kind: RecordKind, id: &str) -> Result<T, StoreError> {
        let record = self.load(kind, id)?;
        serde_json::from_value(record.payload).map_err(|e| StoreError::Corrupt {
            path: self.record_path(kind, id),
            detail: e.to_string(),
        })
    }

    fn all<T: DeserializeOwned>(&self, kind: RecordKind) -> Result<Vec<T>, StoreError> {
        self.ids(kind)?.iter().map(|id| self.get(kind, id)).collect()
    }

    pub fn sessions(&self) -> Result<Vec<Session>, StoreError> {
        self.all(RecordKind::Session)
    }

    /// Audit events in sequence order.
    pub fn audit_events(&self) -> Result<Vec<AuditEvent>, StoreError> {
        let mut events: Vec<AuditEvent> = self.all(RecordKind::AuditEvent)?;
        events.sort_by_key(|e| e.seq);
        Ok(events)
    }

    pub fn ledger(&self) -> Result<Option<AssignmentLedger>, StoreError> {
        let path = self.root.join("ledger.json");
        match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes).map(Some).map_err(|e| StoreError::Corrupt {
                path,
                detail: e.to_string(),
            }),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(io_err(&path)(e)),
        }
    }

    /// Writes the bundled scripts, questionnaires, manifest and adjective map
    /// unless a file already exists. Returns the paths written.
    pub fn seed_data_files(&self) -> Result<Vec<PathBuf>, StoreError> {
        let mut files: Vec<(PathBuf, &str)> = vec![
            (self.root.join("manifest.toml"), bundled::MANIFEST),
            (self.root.join("adjectives.toml"), bundled::ADJECTIVE_MAP),
        ];
        for locale in Locale::ALL {
            files.push((
                self.root.join("questionnaires").join(format!("{locale}.toml")),
                bundled::questionnaire(locale),
            ));
        }
        for (name, _, _, doc) in bundled::SCRIPTS {
            files.push((self.root.join("scripts").join(name), doc));
        }
        let mut written = Vec::new();
        for (path, doc) in files {
            if !path.exists() {
                write_atomic(&path, doc.as_bytes())?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

impl SessionSink for FileStore {
    fn save_session(&self, session: &Session) -> Result<(), String> {
        self.put(RecordKind::Session, session.session_id(), session)
            .map_err(|e| e.to_string())
    }

    fn append_audit(&self, event: &AuditEvent) -> Result<(), String> {
        self.put(RecordKind::AuditEvent, &format!("{:020}", event.seq), event)
            .map_err(|e| e.to_string())
    }

    fn save_ledger(&self, ledger: &AssignmentLedger) -> Result<(), String> {
        let bytes = serde_json::to_vec_pretty(ledger).map_err(|e| e.to_string())?;
        write_atomic(&self.root.join("ledger.json"), &bytes).map_err(|e| e.to_string())
    }
}
