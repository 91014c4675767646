mod common;

use std::fs;
use std::sync::Arc;

use proptest::prelude::*;
use serde_json::json;
use vpsim_core::engine::{ManualClock, SeededIds, SessionStatus};
use vpsim_service::store::{RecordKind, StoreError, StoredRecord, RECORD_VERSION};
use vpsim_service::{build_state, FileStore, Overrides};

#[test]
fn open_seeds_nothing_but_directories() {
    let dir = tempfile::tempdir().unwrap();
    let store = FileStore::open(dir.path()).unwrap();
    for sub in ["sessions", "affect", "audit"] {
        assert!(dir.path().join("records").join(sub).is_dir());
    }
    let written = store.seed_data_files().unwrap();
    assert_eq!(written.len(), 2 + 2 + 4);
    assert!(store.seed_data_files().unwrap().is_empty());
    // Edited data files are never overwritten.
    fs::write(dir.path().join("adjectives.toml"), "# edited\n[entries]\n").unwrap();
    store.seed_data_files().unwrap();
    assert_eq!(fs::read_to_string(dir.path().join("adjectives.toml")).unwrap(), "# edited\n[entries]\n");
}

#[test]
fn unknown_ids_and_bad_envelopes() {
    let dir = tempfile::tempdir().unwrap();
    let store = FileStore::open(dir.path()).unwrap();
    assert!(matches!(store.load(RecordKind::Session, "missing"), Err(StoreError::NotFound { .. })));
    assert!(matches!(store.load(RecordKind::Session, "../x"), Err(StoreError::InvalidId(_))));
    store.put(RecordKind::AffectResult, "a1", &json!({"x": 1})).unwrap();
    // A record filed under the wrong kind or id is refused.
    fs::copy(
        dir.path().join("records/affect/a1.json"),
        dir.path().join("records/sessions/a2.json"),
    )
    .unwrap();
    assert!(matches!(store.load(RecordKind::Session, "a2"), Err(StoreError::Corrupt { .. })));
    fs::write(dir.path().join("records/affect/a3.json"), b"{ not json").unwrap();
    assert!(matches!(store.load(RecordKind::AffectResult, "a3"), Err(StoreError::Corrupt { .. })));
    let mut stale = store.load(RecordKind::AffectResult, "a1").unwrap();
    stale.version = RECORD_VERSION + 1;
    store.persist(&stale).unwrap();
    assert!(matches!(store.load(RecordKind::AffectResult, "a1"), Err(StoreError::Corrupt { .. })));
}

fn overrides(clock: Arc<ManualClock>) -> Overrides {
    Overrides {
        clock: Some(clock),
        ids: Some(Arc::new(SeededIds::new(7))),
        chat: Some(Arc::new(common::golden().provider().unwrap())),
        affect: None,
        admin_token: Some(common::ADMIN_TOKEN.into()),
    }
}

#[tokio::test]
async fn sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (done, open, ledger, audit) = {
        let server = common::spawn(dir.path()).await;
        let done = server.run_golden_session().await;
        let open = server.create_accuser().await;
        server.post(&format!("/sessions/{open}/messages"), json!({"text": "hi"})).await;
        (done, open, server.state.hub.ledger(), server.state.store.audit_events().unwrap())
    };
    // A write interrupted before its rename leaves only a temp file.
    let partial = dir.path().join("records/sessions/ffffffff.json.tmp");
    fs::write(&partial, b"{\"kind\": \"sess").unwrap();

    let clock = Arc::new(ManualClock::new(chrono::Utc::now()));
    let state = build_state(&common::config(dir.path()), overrides(clock)).unwrap();
    assert!(!partial.exists());
    assert_eq!(state.hub.list().len(), 2);
    assert_eq!(state.hub.get(&done).unwrap().status(), SessionStatus::Complete);
    assert_eq!(state.hub.get(&done).unwrap().transcript().len(), 21);
    assert_eq!(state.hub.get(&open).unwrap().status(), SessionStatus::Chatting);
    assert_eq!(state.hub.ledger(), ledger);

    // New work continues the audit sequence and the chat where it stopped.
    let outcome = state.hub.post_message(&open, "and then?").await.unwrap();
    assert_eq!(outcome.session.user_message_count(), 2);
    let events = state.store.audit_events().unwrap();
    assert_eq!(events.len(), audit.len());
    let next = state.hub.create_session(vpsim_core::Locale::En, None).unwrap();
    let events = state.store.audit_events().unwrap();
    assert_eq!(events.last().unwrap().seq, audit.last().unwrap().seq + 1);
    assert_eq!(events.last().unwrap().session_id, next.session_id());
    assert_eq!(state.hub.ledger().counts().values().sum::<u64>(), 3);
}

#[tokio::test]
async fn corrupt_session_record_stops_startup() {
    let dir = tempfile::tempdir().unwrap();
    {
        let server = common::spawn(dir.path()).await;
        server.create_accuser().await;
    }
    let sessions = dir.path().join("records/sessions");
    let file = fs::read_dir(&sessions).unwrap().next().unwrap().unwrap().path();
    fs::write(&file, b"{}").unwrap();
    let clock = Arc::new(ManualClock::new(chrono::Utc::now()));
    let err = build_state(&common::config(dir.path()), overrides(clock)).err().unwrap();
    assert!(err.to_string().contains("corrupt"), "{err}");
}

#[test]
fn broken_data_files_stop_startup() {
    let dir = tempfile::tempdir().unwrap();
    FileStore::open(dir.path()).unwrap().seed_data_files().unwrap();
    fs::write(dir.path().join("scripts/accuser.de.toml"), "script_id = 3\n").unwrap();
    let clock = Arc::new(ManualClock::new(chrono::Utc::now()));
    let err = build_state(&common::config(dir.path()), overrides(clock)).err().unwrap();
    assert!(err.to_string().contains("accuser.de.toml"), "{err}");
}

fn id_strategy() -> impl Strategy<Value = String> {
    "[A-Za-z0-9_-]{1,40}"
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn persist_load_round_trip(id in id_strategy(), text in "\\PC{0,60}", n in any::<i64>(), flag in any::<bool>()) {
        let dir = tempfile::tempdir().unwrap();
        let store = FileStore::open(dir.path()).unwrap();
        let record = StoredRecord {
            kind: RecordKind::AffectResult,
            version: RECORD_VERSION,
            id: id.clone(),
            payload: json!({"text": text, "n": n, "flag": flag, "nested": [1.5, null, {"k": "v"}]}),
        };
        store.persist(&record).unwrap();
        prop_assert_eq!(store.load(RecordKind::AffectResult, &id).unwrap(), record);
        prop_assert_eq!(store.ids(RecordKind::AffectResult).unwrap(), vec![id.clone()]);
        let reopened = FileStore::open(dir.path()).unwrap();
        prop_assert!(reopened.load(RecordKind::AffectResult, &id).is_ok());
        prop_assert!(
            matches!(reopened.load(RecordKind::Session, &id), Err(StoreError::NotFound { .. })),
            "found under another kind"
        );
    }

    #[test]
    fn unsafe_ids_are_refused(id in "[^A-Za-z0-9_-]{1,5}") {
        let dir = tempfile::tempdir().unwrap();
        let store = FileStore::open(dir.path()).unwrap();
        prop_assert!(matches!(store.put(RecordKind::Session, &id, &json!(1)), Err(StoreError::InvalidId(_))));
    }
}
