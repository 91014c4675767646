//! Shared harness: an in-process server on an ephemeral port with a manual
//! clock, seeded ids, the golden scripted provider and the lexicon mock.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{Duration, TimeZone, Utc};
use serde_json::{json, Value};
use tokio::task::JoinHandle;
use vpsim_core::affect::LexiconMockProvider;
use vpsim_core::engine::{ManualClock, SeededIds};
use vpsim_core::gateway::{GoldenConversation, ScriptedProvider};
use vpsim_core::study::Answer;
use vpsim_service::{build_state, router, ApiConfig, AppState, Overrides};

pub const ADMIN_TOKEN: &str = "adm-7f3a9c2e51d84b06";
pub const API_KEY: &str = "sk-test-4d1e8b7a0c93f256";
pub const API_KEY_VAR: &str = "VPSIM_TEST_PROVIDER_KEY";

pub fn config(storage: &Path) -> ApiConfig {
    ApiConfig::from_toml(&format!(
        r#"bind_address = "127.0.0.1:0"
storage_path = "{}"
locales = ["en", "de"]
assignment_seed = 2025

[provider]
endpoint_url = "http://127.0.0.1:9/v1/chat/completions"
model_id = "test-model"
credential_ref = "{API_KEY_VAR}"
timeout_ms = 2000

[provider.retry]
max_attempts = 2
base_backoff_ms = 1
"#,
        storage.display()
    ))
    .expect("test config is valid")
}

pub struct TestServer {
    pub base: String,
    pub client: reqwest::Client,
    pub clock: Arc<ManualClock>,
    pub chat: Arc<ScriptedProvider>,
    pub state: Arc<AppState>,
    pub storage: PathBuf,
    task: JoinHandle<()>,
}

impl Drop for TestServer {
    fn drop(&mut self) {
        self.task.abort();
    }
}

pub fn golden() -> GoldenConversation {
    GoldenConversation::bundled_accuser_en()
}

pub async fn spawn(storage: &Path) -> TestServer {
    spawn_with(storage, Some(ADMIN_TOKEN)).await
}

pub async fn spawn_with(storage: &Path, admin_token: Option<&str>) -> TestServer {
    let clock = Arc::new(ManualClock::new(Utc.with_ymd_and_hms(2025, 3, 3, 10, 0, 0).unwrap()));
    let chat = Arc::new(golden().provider().unwrap());
    let overrides = Overrides {
        clock: Some(clock.clone()),
        ids: Some(Arc::new(SeededIds::new(42))),
        chat: Some(chat.clone()),
        affect: Some(Arc::new(LexiconMockProvider::bundled())),
        admin_token: admin_token.map(str::to_string),
    };
    let state = Arc::new(build_state(&config(storage), overrides).expect("state builds"));
    let (base, task) = serve(state.clone()).await;
    TestServer {
        base,
        client: reqwest::Client::new(),
        clock,
        chat,
        state,
        storage: storage.to_path_buf(),
        task,
    }
}

/// Serves `state` on an ephemeral port; returns the `/api` base URL.
pub async fn serve(state: Arc<AppState>) -> (String, JoinHandle<()>) {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let app = router(state);
    let task = tokio::spawn(async move {
        axum::serve(listener, app).await.unwrap();
    });
    (format!("http://{addr}/api"), task)
}

impl TestServer {
    async fn send(&self, request: reqwest::RequestBuilder) -> (u16, Value) {
        let response = request.send().await.expect("request reaches server");
        let status = response.status().as_u16();
        let text = response.text().await.unwrap();
        let body = serde_json::from_str(&text).unwrap_or(Value::String(text));
        (status, body)
    }

    pub async fn get(&self, path: &str) -> (u16, Value) {
        self.send(self.client.get(format!("{}{path}", self.base))).await
    }

    pub async fn post(&self, path: &str, body: Value) -> (u16, Value) {
        self.send(self.client.post(format!("{}{path}", self.base)).json(&body)).await
    }

    pub async fn admin_get(&self, path: &str) -> (u16, Value) {
        self.send(self.client.get(format!("{}/admin{path}", self.base)).bearer_auth(ADMIN_TOKEN))
            .await
    }

    pub async fn admin_post(&self, path: &str, body: Value) -> (u16, Value) {
        self.send(
            self.client
                .post(format!("{}/admin{path}", self.base))
                .bearer_auth(ADMIN_TOKEN)
                .json(&body),
        )
        .await
    }

    /// Creates an English accuser session and returns its id.
    pub async fn create_accuser(&self) -> String {
        let (status, body) = self.post("/sessions", json!({"locale": "en", "style": "accuser"})).await;
        assert_eq!(status, 201, "{body}");
        body["session_id"].as_str().unwrap().to_string()
    }

    /// Runs the golden conversation, spacing turns 30 s apart, then
    /// finishes the chat and submits [`answers`]. Returns the session id.
    pub async fn run_golden_session(&self) -> String {
        let id = self.create_accuser().await;
        for turn in golden().turns {
            let (status, body) = self
                .post(&format!("/sessions/{id}/messages"), json!({"text": turn.user}))
                .await;
            assert_eq!(status, 200, "{body}");
            self.clock.advance(Duration::seconds(30));
        }
        let (status, body) = self.post(&format!("/sessions/{id}/finish"), json!({})).await;
        assert_eq!(status, 200, "{body}");
        let (status, body) = self
            .post(&format!("/sessions/{id}/questionnaire"), json!({"answers": answers()}))
            .await;
        assert_eq!(status, 200, "{body}");
        id
    }
}

/// A complete, valid questionnaire submission.
pub fn answers() -> Value {
    let pairs = [
        ("realism", Answer::Choices(["very", "very", "moderately", "extremely", "very"].map(String::from).to_vec())),
        ("authenticity", Answer::Choice("agree".into())),
        ("adjectives", Answer::Choices(vec!["aggressive".into(), "suspicious".into(), "morose".into()])),
        ("style", Answer::Choice("accuser".into())),
        ("effectiveness", Answer::Likert(4)),
        ("education", Answer::Likert(5)),
        ("age", Answer::Text("38".into())),
        ("gender", Answer::Choice("female".into())),
        ("background", Answer::Choice("therapeutic_psychologist".into())),
        ("ai_trust", Answer::Choice("yes_sometimes".into())),
        ("ai_usage", Answer::Likert(4)),
        ("ai_excitement", Answer::Likert(4)),
        ("recommend", Answer::Likert(4)),
        ("pay", Answer::Likert(2)),
        ("change_one_thing", Answer::Text("Longer cases.".into())),
    ];
    let map: BTreeMap<String, Answer> = pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    serde_json::to_value(map).unwrap()
}

/// Every file under `dir`, keyed by relative path.
pub fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(current) = stack.pop() {
        for entry in std::fs::read_dir(&current).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// Every string anywhere inside `value`.
pub fn strings(value: &Value) -> Vec<&str> {
    match value {
        Value::String(s) => vec![s.as_str()],
        Value::Array(items) => items.iter().flat_map(strings).collect(),
        Value::Object(map) => map.values().flat_map(strings).collect(),
        _ => Vec::new(),
    }
}
