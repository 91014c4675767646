mod common;

use chrono::Duration;
use serde_json::{json, Value};
use vpsim_core::engine::replay_statuses;
use vpsim_core::prompt::THOUGHT_DELIMITER;

fn assert_envelope(status: u16, body: &Value, code: u16, kind: &str) {
    assert_eq!(status, code, "{body}");
    assert_eq!(body["code"], code, "{body}");
    assert_eq!(body["kind"], kind, "{body}");
    assert!(body["detail"].as_str().is_some_and(|d| !d.is_empty()), "{body}");
}

fn assert_no_thoughts(body: &Value) {
    for s in common::strings(body) {
        assert!(!s.contains(THOUGHT_DELIMITER), "leaked annotation: {s}");
    }
}

#[tokio::test]
async fn participant_responses_never_contain_thoughts() {
    let dir = tempfile::tempdir().unwrap();
    let server = common::spawn(dir.path()).await;
    let (status, created) = server.post("/sessions", json!({"locale": "en", "style": "accuser"})).await;
    assert_eq!(status, 201);
    assert_no_thoughts(&created);
    assert_eq!(created["messages"][0]["text"], "Hello!");
    assert_eq!(created["patient_name"], "Gerhard Anton");
    assert!(created.get("style").is_none() && created.get("script_id").is_none());
    let id = created["session_id"].as_str().unwrap().to_string();
    for turn in common::golden().turns {
        let (status, reply) = server.post(&format!("/sessions/{id}/messages"), json!({"text": turn.user})).await;
        assert_eq!(status, 200);
        assert_no_thoughts(&reply);
        assert!(!reply["reply"].as_str().unwrap().starts_with('<'));
        server.clock.advance(Duration::seconds(20));
    }
    let (_, view) = server.get(&format!("/sessions/{id}")).await;
    assert_no_thoughts(&view);
    assert_eq!(view["messages"].as_array().unwrap().len(), 21);
    let (_, finished) = server.post(&format!("/sessions/{id}/finish"), json!({})).await;
    assert_no_thoughts(&finished);
    assert_eq!(finished["status"], "questionnaire");
    let (status, questionnaire) = server.get(&format!("/sessions/{id}/questionnaire")).await;
    assert_eq!(status, 200);
    assert_eq!(questionnaire["locale"], "en");
    let (_, done) = server
        .post(&format!("/sessions/{id}/questionnaire"), json!({"answers": common::answers()}))
        .await;
    assert_no_thoughts(&done);
    assert_eq!(done["status"], "complete");

    // The raw transcript keeps annotations for researchers.
    let (status, transcript) = server.admin_get(&format!("/sessions/{id}/transcript")).await;
    assert_eq!(status, 200);
    assert!(common::strings(&transcript).iter().any(|s| s.contains(THOUGHT_DELIMITER)));
}

#[tokio::test]
async fn state_violations_are_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let server = common::spawn(dir.path()).await;
    let id = server.create_accuser().await;
    let (status, body) = server.post(&format!("/sessions/{id}/finish"), json!({})).await;
    assert_envelope(status, &body, 409, "invalid_state");
    let (status, body) = server
        .post(&format!("/sessions/{id}/questionnaire"), json!({"answers": common::answers()}))
        .await;
    assert_envelope(status, &body, 409, "invalid_state");

    let done = server.run_golden_session().await;
    let (status, body) = server.post(&format!("/sessions/{done}/messages"), json!({"text": "one more"})).await;
    assert_envelope(status, &body, 409, "invalid_state");
    let (status, body) = server
        .post(&format!("/sessions/{done}/questionnaire"), json!({"answers": common::answers()}))
        .await;
    assert_envelope(status, &body, 409, "invalid_state");
}

#[tokio::test]
async fn validation_errors_are_bad_requests() {
    let dir = tempfile::tempdir().unwrap();
    let server = common::spawn(dir.path()).await;
    let (status, body) = server.post("/sessions", json!({"locale": "fr"})).await;
    assert_envelope(status, &body, 400, "invalid_body");
    let (status, body) = server.post("/sessions", json!({"locale": "en", "style": "congruent"})).await;
    assert_envelope(status, &body, 400, "unknown_style");
    let (status, body) = server.get("/questionnaires/xx").await;
    assert_envelope(status, &body, 400, "unknown_locale");

    let id = server.create_accuser().await;
    let (status, body) = server.post(&format!("/sessions/{id}/messages"), json!({"text": "  "})).await;
    assert_envelope(status, &body, 400, "empty_text");
    let (status, body) = server.post(&format!("/sessions/{id}/messages"), json!({"words": "hi"})).await;
    assert_envelope(status, &body, 400, "invalid_body");

    server.post(&format!("/sessions/{id}/messages"), json!({"text": "hi"})).await;
    server.post(&format!("/sessions/{id}/finish"), json!({})).await;
    let mut answers = common::answers();
    answers["effectiveness"] = json!({"type": "likert", "value": 9});
    let (status, body) = server
        .post(&format!("/sessions/{id}/questionnaire"), json!({"answers": answers}))
        .await;
    assert_envelope(status, &body, 400, "invalid_response");
    assert!(body["detail"].as_str().unwrap().contains("effectiveness"));
    let (_, view) = server.get(&format!("/sessions/{id}")).await;
    assert_eq!(view["status"], "questionnaire");

    let (status, body) = server.admin_get("/affect?style=accuser&k=0").await;
    assert_envelope(status, &body, 400, "invalid_k");
    let (status, body) = server.admin_post(&format!("/sessions/{id}/exclusion"), json!({"note": " "})).await;
    assert_envelope(status, &body, 400, "empty_note");
}

#[tokio::test]
async fn unknown_ids_and_routes_are_not_found() {
    let dir = tempfile::tempdir().unwrap();
    let server = common::spawn(dir.path()).await;
    let (status, body) = server.get("/sessions/does-not-exist").await;
    assert_envelope(status, &body, 404, "not_found");
    let (status, body) = server.post("/sessions/nope/messages", json!({"text": "hi"})).await;
    assert_envelope(status, &body, 404, "not_found");
    let (status, body) = server.get("/nothing-here").await;
    assert_envelope(status, &body, 404, "not_found");
    let (status, body) = server.admin_get("/affect?style=rationalizer").await;
    assert_envelope(status, &body, 404, "no_data");
    let (status, body) = server.get("/health").await;
    assert_eq!((status, body), (200, json!({"status": "ok"})));
}

#[tokio::test]
async fn admin_routes_need_the_token() {
    let dir = tempfile::tempdir().unwrap();
    let server = common::spawn(dir.path()).await;
    let url = format!("{}/admin/sessions", server.base);
    let missing = server.client.get(&url).send().await.unwrap();
    assert_eq!(missing.status().as_u16(), 401);
    let wrong = server.client.get(&url).bearer_auth("adm-7f3a9c2e51d84b07").send().await.unwrap();
    assert_eq!(wrong.status().as_u16(), 401);
    let body: Value = wrong.json().await.unwrap();
    assert_eq!(body["kind"], "unauthorized");
    assert!(!body.to_string().contains(common::ADMIN_TOKEN));
    let (status, _) = server.admin_get("/sessions").await;
    assert_eq!(status, 200);
    drop(server);

    let other = tempfile::tempdir().unwrap();
    let disabled = common::spawn_with(other.path(), None).await;
    let (status, body) = disabled.admin_get("/sessions").await;
    assert_envelope(status, &body, 403, "admin_disabled");
}

#[tokio::test]
async fn admin_views_and_exclusions() {
    let dir = tempfile::tempdir().unwrap();
    let server = common::spawn(dir.path()).await;
    let done = server.run_golden_session().await;
    let flagged = server.run_golden_session().await;
    let (status, row) = server.admin_post(&format!("/sessions/{flagged}/exclusion"), json!({"note": "test participant"})).await;
    assert_eq!(status, 200);
    assert_eq!(row["excluded"], true);
    assert_eq!(row["exclusion_reason"], "manual: test participant");

    let (_, rows) = server.admin_get("/sessions").await;
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let done_row = rows.iter().find(|r| r["session_id"] == done).unwrap();
    assert_eq!(done_row["style"], "accuser");
    assert_eq!(done_row["user_messages"], 10);
    assert_eq!(done_row["minutes"], "5.000");

    let (status, affect) = server.admin_post(&format!("/sessions/{done}/affect?k=5"), json!({})).await;
    assert_eq!(status, 200, "{affect}");
    assert_eq!(affect["top_emotions"].as_array().unwrap().len(), 5);
    assert_eq!(affect["top_emotions"][0][0], "Pain");
    assert_eq!(affect["dominant_sentiment"].as_array().unwrap().len(), 11);
    assert!(dir.path().join(format!("records/affect/{done}.json")).exists());

    let (status, cohort) = server.admin_get("/affect?style=accuser").await;
    assert_eq!(status, 200);
    assert_eq!(cohort["session_ids"], json!([done]));
    assert_eq!(cohort["conversations"], 1);

    let (status, metrics) = server.admin_get("/metrics").await;
    assert_eq!(status, 200);
    let accuser = &metrics["accuser"];
    assert_eq!(accuser["questionnaire"]["respondents"], 1);
    assert_eq!(accuser["questionnaire"]["style_identification"]["counts"]["accuser"], 1);
    assert_eq!(accuser["questionnaire"]["adjective_precision"]["total"], 3);
    assert_eq!(accuser["engagement"]["sessions"], 1);
}

#[tokio::test]
async fn audit_trail_replays_to_session_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let server = common::spawn(dir.path()).await;
    server.run_golden_session().await;
    let short = server.create_accuser().await;
    server.post(&format!("/sessions/{short}/messages"), json!({"text": "hi"})).await;
    server.create_accuser().await;
    server.admin_post("/exclusions/apply", json!({})).await;

    let events = server.state.store.audit_events().unwrap();
    let (_, rows) = server.admin_get("/sessions").await;
    let live: std::collections::BTreeMap<String, String> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["session_id"].as_str().unwrap().into(), r["status"].as_str().unwrap().into()))
        .collect();
    let replayed: std::collections::BTreeMap<String, String> = replay_statuses(&events)
        .into_iter()
        .map(|(id, status)| (id, status.to_string()))
        .collect();
    assert_eq!(replayed, live);
    assert_eq!(live[&short], "excluded");
}

#[tokio::test]
async fn balanced_assignment_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let server = common::spawn(dir.path()).await;
    let mut styles = Vec::new();
    for i in 0..12 {
        let locale = if i % 2 == 0 { "en" } else { "de" };
        let (status, body) = server.post("/sessions", json!({"locale": locale})).await;
        assert_eq!(status, 201);
        let id = body["session_id"].as_str().unwrap();
        let (_, transcript) = server.admin_get(&format!("/sessions/{id}/transcript")).await;
        styles.push(transcript["script_id"].as_str().unwrap().split('-').next().unwrap().to_string());
    }
    let accusers = styles.iter().filter(|s| *s == "accuser").count();
    assert_eq!(accusers, 6, "{styles:?}");
}
