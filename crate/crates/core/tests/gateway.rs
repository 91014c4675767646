use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::Router;
use proptest::prelude::*;
use vpsim_core::bundled;
use vpsim_core::gateway::{
    complete_chat, request_body, GatewayError, GatewayErrorKind, GoldenConversation, HttpChatProvider,
    ProviderConfig, RetryPolicy, ScriptedProvider,
};
use vpsim_core::prompt::{assemble, PromptPlan};
use vpsim_core::script::{load_script, CasePrompt, CategoryManifest};

fn plan() -> PromptPlan {
    let manifest = CategoryManifest::bundled();
    let case = CasePrompt::new(&load_script(bundled::ACCUSER_EN, &manifest).unwrap(), &manifest);
    assemble(&case, &[], "Hello, what brings you here?").unwrap()
}

fn config(endpoint_url: &str, max_attempts: u32) -> ProviderConfig {
    ProviderConfig {
        endpoint_url: endpoint_url.to_string(),
        model_id: "gpt-4".into(),
        temperature: 0.7,
        max_output_tokens: 256,
        credential_ref: "VPSIM_TEST_UNUSED_KEY".into(),
        retry: RetryPolicy {
            max_attempts,
            base_backoff_ms: 1,
        },
        timeout_ms: 2_000,
    }
}

#[derive(Default)]
struct Mock {
    /// (status, body) served in order; the last one repeats.
    script: Vec<(u16, String)>,
    seen: Mutex<Vec<(Option<String>, String)>>,
}

async fn handle(State(mock): State<Arc<Mock>>, headers: HeaderMap, body: String) -> (StatusCode, String) {
    let auth = headers
        .get("authorization")
        .and_then(|v| v.to_str().ok())
        .map(str::to_owned);
    let mut seen = mock.seen.lock().unwrap();
    seen.push((auth, body));
    let (status, body) = mock.script[(seen.len() - 1).min(mock.script.len() - 1)].clone();
    (StatusCode::from_u16(status).unwrap(), body)
}

async fn serve(script: Vec<(u16, &str)>) -> (String, Arc<Mock>) {
    let mock = Arc::new(Mock {
        script: script.into_iter().map(|(s, b)| (s, b.to_string())).collect(),
        ..Mock::default()
    });
    let app = Router::new().route("/v1/chat/completions", post(handle)).with_state(mock.clone());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    (format!("http://{addr}/v1/chat/completions"), mock)
}

const OK_BODY: &str = r#"{"id":"x","choices":[{"index":0,"message":{"role":"assistant","content":"<annoyed> My hip."}}]}"#;

#[tokio::test]
async fn http_provider_sends_wire_body_and_parses_reply() {
    let (url, mock) = serve(vec![(200, OK_BODY)]).await;
    let config = config(&url, 3);
    let provider = HttpChatProvider::new(&config, Some("sk-secret".into())).unwrap();
    let plan = plan();
    let completion = complete_chat(&provider, &plan, &config).await.unwrap();
    assert_eq!(completion.content, "<annoyed> My hip.");
    assert_eq!(completion.attempts, 1);
    let seen = mock.seen.lock().unwrap();
    assert_eq!(seen[0].0.as_deref(), Some("Bearer sk-secret"));
    assert_eq!(seen[0].1, request_body(&plan, &config));
    let body: serde_json::Value = serde_json::from_str(&seen[0].1).unwrap();
    assert_eq!(body["model"], "gpt-4");
    assert_eq!(body["messages"].as_array().unwrap().len(), 4);
    assert_eq!(body["messages"][2]["role"], "assistant");
    assert_eq!(body["stream"], false);
}

#[tokio::test]
async fn http_provider_retries_rate_limits_then_succeeds() {
    let (url, mock) = serve(vec![(429, "slow down"), (503, "busy"), (200, OK_BODY)]).await;
    let config = config(&url, 3);
    let provider = HttpChatProvider::new(&config, None).unwrap();
    let completion = complete_chat(&provider, &plan(), &config).await.unwrap();
    assert_eq!(completion.attempts, 3);
    let seen = mock.seen.lock().unwrap();
    assert_eq!(seen.len(), 3);
    assert!(seen.iter().all(|(auth, _)| auth.is_none()));
}

#[tokio::test]
async fn http_provider_gives_up_after_max_attempts() {
    let (url, mock) = serve(vec![(429, "slow down")]).await;
    let config = config(&url, 2);
    let provider = HttpChatProvider::new(&config, None).unwrap();
    let err = complete_chat(&provider, &plan(), &config).await.unwrap_err();
    assert_eq!(err.kind(), GatewayErrorKind::RateLimited);
    assert_eq!(mock.seen.lock().unwrap().len(), 2);
}

#[tokio::test]
async fn http_provider_does_not_retry_rejections() {
    let overflow = r#"{"error":{"code":"context_length_exceeded","message":"This model's maximum context length is 8192 tokens"}}"#;
    for (status, body, kind) in [
        (401, "bad key", GatewayErrorKind::ProviderRejected),
        (400, overflow, GatewayErrorKind::ContextOverflow),
        (200, r#"{"choices":[]}"#, GatewayErrorKind::MalformedResponse),
    ] {
        let (url, mock) = serve(vec![(status, body)]).await;
        let config = config(&url, 3);
        let provider = HttpChatProvider::new(&config, None).unwrap();
        let err = complete_chat(&provider, &plan(), &config).await.unwrap_err();
        assert_eq!(err.kind(), kind, "{status} {body}");
        assert!(!err.retryable());
        assert_eq!(mock.seen.lock().unwrap().len(), 1);
    }
}

#[tokio::test]
async fn unreachable_endpoint_is_a_network_error() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let config = config(&format!("http://{addr}/v1/chat/completions"), 1);
    let provider = HttpChatProvider::new(&config, None).unwrap();
    let err = complete_chat(&provider, &plan(), &config).await.unwrap_err();
    assert_eq!(err.kind(), GatewayErrorKind::Network);
}

#[tokio::test]
async fn slow_endpoint_times_out() {
    let app = Router::new().route(
        "/v1/chat/completions",
        post(|| async {
            tokio::time::sleep(Duration::from_millis(500)).await;
            OK_BODY
        }),
    );
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    let mut config = config(&format!("http://{addr}/v1/chat/completions"), 1);
    config.timeout_ms = 50;
    let provider = HttpChatProvider::new(&config, None).unwrap();
    let err = complete_chat(&provider, &plan(), &config).await.unwrap_err();
    assert_eq!(err.kind(), GatewayErrorKind::Timeout);
}

#[test]
fn debug_output_redacts_key() {
    let provider = HttpChatProvider::new(&config("http://localhost/", 1), Some("sk-secret".into())).unwrap();
    let debug = format!("{provider:?}");
    assert!(!debug.contains("sk-secret"), "{debug}");
}

#[test]
fn config_validation() {
    assert!(config("http://localhost/v1", 3).validate().is_ok());
    let mut bad = config("not a url", 0);
    bad.temperature = -1.0;
    assert_eq!(bad.validate().unwrap_err().len(), 3);
}

#[test]
fn backoff_doubles() {
    let policy = RetryPolicy {
        max_attempts: 4,
        base_backoff_ms: 500,
    };
    let delays: Vec<u128> = (1..=3).map(|a| policy.backoff(a).as_millis()).collect();
    assert_eq!(delays, [500, 1000, 2000]);
}

#[tokio::test]
async fn scripted_provider_replays_golden_by_turn() {
    let golden = GoldenConversation::bundled_accuser_en();
    assert_eq!(golden.turns.len(), 10);
    let provider = golden.provider().unwrap();
    let config = config("http://unused/", 1);
    let completion = complete_chat(&provider, &plan(), &config).await.unwrap();
    assert_eq!(completion.content, golden.turns[0].reply);
    assert_eq!(provider.call_count(), 1);
    assert_eq!(provider.requests()[0], plan());
}

#[tokio::test]
async fn scripted_fingerprint_lookup_wins() {
    let plan = plan();
    let provider = ScriptedProvider::builder()
        .turn_replies(["by turn"])
        .fingerprint_reply(plan.fingerprint(), "by fingerprint")
        .build()
        .unwrap();
    let reply = complete_chat(&provider, &plan, &config("http://unused/", 1)).await.unwrap();
    assert_eq!(reply.content, "by fingerprint");
}

#[test]
fn scripted_provider_needs_fixtures() {
    assert!(ScriptedProvider::builder().build().is_err());
}

fn kind_strategy() -> impl Strategy<Value = GatewayErrorKind> {
    proptest::sample::select(GatewayErrorKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn calls_never_exceed_max_attempts(max_attempts in 1u32..6, faults in proptest::collection::vec(kind_strategy(), 0..8)) {
        let rt = tokio::runtime::Builder::new_current_thread().enable_time().build().unwrap();
        let mut builder = ScriptedProvider::builder().turn_replies(["ok"]);
        for kind in &faults {
            builder = builder.fault(GatewayError::new(*kind, "injected"));
        }
        let provider = builder.build().unwrap();
        let mut config = config("http://unused/", max_attempts);
        config.retry.base_backoff_ms = 0;
        let result = rt.block_on(complete_chat(&provider, &plan(), &config));
        prop_assert!(provider.call_count() as u32 <= max_attempts);
        // Expected outcome from the fault queue alone.
        let mut expected_calls = 0u32;
        let mut expected_ok = false;
        for attempt in 1..=max_attempts {
            expected_calls = attempt;
            match faults.get(attempt as usize - 1) {
                None => { expected_ok = true; break; }
                Some(kind) if kind.is_retryable() => continue,
                Some(_) => break,
            }
        }
        prop_assert_eq!(provider.call_count() as u32, expected_calls);
        prop_assert_eq!(result.is_ok(), expected_ok);
    }

    #[test]
    fn request_body_is_byte_stable(temperature in 0.0f64..2.0, tokens in 1u32..4096) {
        let mut config = config("http://unused/", 1);
        config.temperature = temperature;
        config.max_output_tokens = tokens;
        let a = request_body(&plan(), &config);
        let b = request_body(&plan(), &config.clone());
        prop_assert_eq!(&a, &b);
        let parsed: serde_json::Value = serde_json::from_str(&a).unwrap();
        prop_assert_eq!(parsed["max_tokens"].as_u64(), Some(u64::from(tokens)));
    }
}
