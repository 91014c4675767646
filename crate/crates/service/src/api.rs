//! HTTP surface. Participant routes live under `/api`, admin routes under
//! `/api/admin` behind a bearer token. Errors use one envelope:
//! `{"code": <http status>, "kind": "<machine kind>", "detail": "<text>"}`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use vpsim_core::affect::{AffectError, EMOTION_COUNT};
use vpsim_core::engine::{build_bundle, session_row, transcript_file, EngineError, Session, SessionStatus};
use vpsim_core::prompt::Role;
use vpsim_core::study::{write_bundle, Answer, Questionnaire, SessionRow, TranscriptFile};
use vpsim_core::{Locale, SatirStyle};

use crate::analytics::{self, AnalyticsError, SessionAffect, StyleAffect, StyleMetrics};
use crate::app::AppState;

pub type SharedState = Arc<AppState>;

/// Default number of emotions in affect tables.
pub const DEFAULT_TOP_K: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorEnvelope {
    pub code: u16,
    pub kind: String,
    pub detail: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: String,
    detail: String,
}

impl ApiError {
    pub fn new(status: StatusCode, kind: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            status,
            kind: kind.into(),
            detail: detail.into(),
        }
    }

    fn bad_request(kind: &str, detail: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, kind, detail)
    }

    fn internal(kind: &str, detail: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, kind, detail)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::error!(kind = %self.kind, detail = %self.detail, "request failed");
        }
        let body = ErrorEnvelope {
            code: self.status.as_u16(),
            kind: self.kind,
            detail: self.detail,
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let detail = e.to_string();
        match e {
            EngineError::NoScript(_) | EngineError::UnknownStyle { .. } => Self::bad_request("unknown_style", detail),
            EngineError::InvalidState { .. } => Self::new(StatusCode::CONFLICT, "invalid_state", detail),
            EngineError::TurnInFlight => Self::new(StatusCode::CONFLICT, "turn_in_flight", detail),
            EngineError::EmptyText => Self::bad_request("empty_text", detail),
            EngineError::Response(_) => Self::bad_request("invalid_response", detail),
            EngineError::NotFound(_) => Self::new(StatusCode::NOT_FOUND, "not_found", detail),
            EngineError::EmptyInput => Self::new(StatusCode::NOT_FOUND, "no_data", detail),
            EngineError::Gateway(g) => {
                let status = if g.kind() == vpsim_core::gateway::GatewayErrorKind::Timeout {
                    StatusCode::GATEWAY_TIMEOUT
                } else {
                    StatusCode::BAD_GATEWAY
                };
                Self::new(status, g.kind().as_str(), g.detail())
            }
            EngineError::Plan(_) => Self::internal("plan", detail),
            EngineError::Script(_) => Self::internal("script", detail),
            EngineError::Storage(_) => Self::internal("storage", detail),
        }
    }
}

impl From<AnalyticsError> for ApiError {
    fn from(e: AnalyticsError) -> Self {
        let detail = e.to_string();
        match e {
            AnalyticsError::Affect(AffectError::EmptyInput) => Self::new(StatusCode::NOT_FOUND, "no_data", detail),
            AnalyticsError::Affect(AffectError::KOutOfRange { .. }) => Self::bad_request("invalid_k", detail),
            AnalyticsError::Affect(AffectError::Timeout(_)) => Self::new(StatusCode::GATEWAY_TIMEOUT, "affect_provider", detail),
            AnalyticsError::Affect(_) => Self::new(StatusCode::BAD_GATEWAY, "affect_provider", detail),
            AnalyticsError::Engine(e) => e.into(),
            AnalyticsError::Metric(_) => Self::internal("metrics", detail),
            AnalyticsError::Store(_) => Self::internal("storage", detail),
        }
    }
}

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> Result<T, ApiError> {
    body.map(|Json(v)| v)
        .map_err(|e| ApiError::bad_request("invalid_body", e.body_text()))
}

fn parse_locale(raw: &str, state: &AppState) -> Result<Locale, ApiError> {
    let locale: Locale = raw
        .parse()
        .map_err(|_| ApiError::bad_request("unknown_locale", format!("unknown locale `{raw}`")))?;
    if !state.locales.contains(&locale) {
        return Err(ApiError::bad_request("unknown_locale", format!("locale `{raw}` is not enabled")));
    }
    Ok(locale)
}

// ---- participant views ----

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisibleMessage {
    pub role: String,
    pub text: String,
}

/// What a participant may see of a session: no style, no script id and
/// no annotation content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub session_id: String,
    pub participant_token: String,
    pub locale: Locale,
    pub status: SessionStatus,
    pub patient_name: String,
    pub messages: Vec<VisibleMessage>,
}

fn session_view(state: &AppState, session: &Session) -> SessionView {
    let patient_name = state
        .hub
        .engine()
        .registry()
        .by_id(session.script_id())
        .map(|s| s.script.persona.full_name())
        .unwrap_or_default();
    SessionView {
        session_id: session.session_id().to_string(),
        participant_token: session.participant_token().to_string(),
        locale: session.locale(),
        status: session.status(),
        patient_name,
        messages: session
            .transcript()
            .iter()
            .filter(|m| m.role() != Role::System)
            .map(|m| VisibleMessage {
                role: m.role().as_str().to_string(),
                text: m.display_text(),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateSession {
    pub locale: Locale,
    #[serde(default)]
    pub style: Option<SatirStyle>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PostMessage {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnReply {
    pub reply: String,
    pub status: SessionStatus,
    pub user_messages: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubmitQuestionnaire {
    pub answers: BTreeMap<String, Answer>,
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({"status": "ok"}))
}

async fn create_session(
    State(state): State<SharedState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let request = json_body(body)?;
    parse_locale(request.locale.as_str(), &state)?;
    let session = state.hub.create_session(request.locale, request.style)?;
    tracing::info!(session = session.session_id(), "session created");
    Ok((StatusCode::CREATED, Json(session_view(&state, &session))))
}

async fn get_session(State(state): State<SharedState>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let session = state.hub.get(&id)?;
    Ok(Json(session_view(&state, &session)))
}

async fn post_message(
    State(state): State<SharedState>,
    Path(id): Path<String>,
    body: Result<Json<PostMessage>, JsonRejection>,
) -> Result<Json<TurnReply>, ApiError> {
    let request = json_body(body)?;
    let outcome = state.hub.post_message(&id, &request.text).await?;
    Ok(Json(TurnReply {
        reply: outcome.display_reply,
        status: outcome.session.status(),
        user_messages: outcome.session.user_message_count(),
    }))
}

async fn finish_chat(State(state): State<SharedState>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let session = state.hub.finish_chat(&id)?;
    Ok(Json(session_view(&state, &session)))
}

fn questionnaire_for(state: &AppState, locale: Locale) -> Result<Arc<Questionnaire>, ApiError> {
    state
        .hub
        .questionnaire(locale)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("no questionnaire for {locale}")))
}

async fn session_questionnaire(
    State(state): State<SharedState>,
    Path(id): Path<String>,
) -> Result<Json<Questionnaire>, ApiError> {
    let session = state.hub.get(&id)?;
    Ok(Json(questionnaire_for(&state, session.locale())?.as_ref().clone()))
}

async fn submit_questionnaire(
    State(state): State<SharedState>,
    Path(id): Path<String>,
    body: Result<Json<SubmitQuestionnaire>, JsonRejection>,
) -> Result<Json<SessionView>, ApiError> {
    let request = json_body(body)?;
    let session = state.hub.submit_questionnaire(&id, request.answers)?;
    tracing::info!(session = session.session_id(), "questionnaire submitted");
    Ok(Json(session_view(&state, &session)))
}

async fn get_questionnaire(
    State(state): State<SharedState>,
    Path(locale): Path<String>,
) -> Result<Json<Questionnaire>, ApiError> {
    let locale = parse_locale(&locale, &state)?;
    Ok(Json(questionnaire_for(&state, locale)?.as_ref().clone()))
}

// ---- admin ----

fn tokens_match(given: &str, expected: &str) -> bool {
    given.len() == expected.len() && given.bytes().zip(expected.bytes()).fold(0u8, |acc, (a, b)| acc | (a ^ b)) == 0
}

async fn require_admin(State(state): State<SharedState>, request: Request, next: Next) -> Result<Response, ApiError> {
    let Some(expected) = state.admin_token.as_deref() else {
        return Err(ApiError::new(StatusCode::FORBIDDEN, "admin_disabled", "no admin token configured"));
    };
    let given = request
        .headers()
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "));
    match given {
        Some(token) if tokens_match(token, expected) => Ok(next.run(request).await),
        _ => Err(ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "missing or wrong admin token")),
    }
}

async fn admin_sessions(State(state): State<SharedState>) -> Json<Vec<SessionRow>> {
    Json(state.hub.list().iter().map(session_row).collect())
}

async fn admin_transcript(
    State(state): State<SharedState>,
    Path(id): Path<String>,
) -> Result<Json<TranscriptFile>, ApiError> {
    Ok(Json(transcript_file(&state.hub.get(&id)?)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExcludeRequest {
    pub note: String,
}

async fn admin_exclude(
    State(state): State<SharedState>,
    Path(id): Path<String>,
    body: Result<Json<ExcludeRequest>, JsonRejection>,
) -> Result<Json<SessionRow>, ApiError> {
    let request = json_body(body)?;
    if request.note.trim().is_empty() {
        return Err(ApiError::bad_request("empty_note", "exclusion note must not be empty"));
    }
    let session = state.hub.exclude(&id, request.note.trim())?;
    Ok(Json(session_row(&session)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedExclusions {
    pub excluded: Vec<String>,
}

async fn admin_apply_exclusions(State(state): State<SharedState>) -> Result<Json<AppliedExclusions>, ApiError> {
    let changed = state.hub.apply_exclusions()?;
    Ok(Json(AppliedExclusions {
        excluded: changed.iter().map(|s| s.session_id().to_string()).collect(),
    }))
}

#[derive(Debug, Clone, Deserialize)]
pub struct TopK {
    pub k: Option<usize>,
}

fn top_k(query: &TopK) -> Result<usize, ApiError> {
    let k = query.k.unwrap_or(DEFAULT_TOP_K);
    if (1..=EMOTION_COUNT).contains(&k) {
        Ok(k)
    } else {
        Err(ApiError::bad_request("invalid_k", format!("k must be in 1..={EMOTION_COUNT}")))
    }
}

async fn admin_session_affect(
    State(state): State<SharedState>,
    Path(id): Path<String>,
    Query(query): Query<TopK>,
) -> Result<Json<SessionAffect>, ApiError> {
    let k = top_k(&query)?;
    let session = state.hub.get(&id)?;
    let record = analytics::score_session(&session, state.affect.as_ref(), &state.store).await?;
    let summary = analytics::session_affect(&session, &record, k).map_err(AnalyticsError::from)?;
    Ok(Json(summary))
}

#[derive(Debug, Clone, Deserialize)]
pub struct CohortQuery {
    pub style: SatirStyle,
    pub k: Option<usize>,
}

async fn admin_cohort_affect(
    State(state): State<SharedState>,
    Query(query): Query<CohortQuery>,
) -> Result<Json<StyleAffect>, ApiError> {
    let k = top_k(&TopK { k: query.k })?;
    let sessions = state.hub.list();
    let summary = analytics::style_affect(&sessions, query.style, k, state.affect.as_ref(), &state.store).await?;
    Ok(Json(summary))
}

fn metrics_value(state: &AppState) -> Result<BTreeMap<SatirStyle, StyleMetrics>, ApiError> {
    let locale = state.locales[0];
    let questionnaire = questionnaire_for(state, locale)?;
    Ok(analytics::study_metrics(&state.hub.list(), &questionnaire, &state.adjectives)?)
}

async fn admin_metrics(State(state): State<SharedState>) -> Result<Json<BTreeMap<SatirStyle, StyleMetrics>>, ApiError> {
    Ok(Json(metrics_value(&state)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportSummary {
    pub dir: PathBuf,
    pub sessions: usize,
    pub responses: usize,
}

/// Export directory under the storage root.
pub fn export_dir(state: &AppState) -> PathBuf {
    state.store.root().join("export")
}

async fn admin_export(State(state): State<SharedState>) -> Result<Json<ExportSummary>, ApiError> {
    let metrics = serde_json::to_value(metrics_value(&state)?).map_err(|e| ApiError::internal("export", e.to_string()))?;
    let bundle = build_bundle(&state.hub.list(), metrics);
    let dir = export_dir(&state);
    write_bundle(&bundle, &dir).map_err(|e| ApiError::internal("export", e.to_string()))?;
    tracing::info!(dir = %dir.display(), sessions = bundle.sessions.len(), "export written");
    Ok(Json(ExportSummary {
        dir,
        sessions: bundle.sessions.len(),
        responses: bundle.responses.len(),
    }))
}

pub fn router(state: SharedState) -> Router {
    let admin = Router::new()
        .route("/sessions", get(admin_sessions))
        .route("/sessions/{id}/transcript", get(admin_transcript))
        .route("/sessions/{id}/exclusion", post(admin_exclude))
        .route("/sessions/{id}/affect", post(admin_session_affect))
        .route("/exclusions/apply", post(admin_apply_exclusions))
        .route("/affect", get(admin_cohort_affect))
        .route("/metrics", get(admin_metrics))
        .route("/export", post(admin_export))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_admin));
    let api = Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/messages", post(post_message))
        .route("/sessions/{id}/finish", post(finish_chat))
        .route("/sessions/{id}/questionnaire", get(session_questionnaire).post(submit_questionnaire))
        .route("/questionnaires/{locale}", get(get_questionnaire))
        .nest("/admin", admin);
    Router::new()
        .nest("/api", api)
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .with_state(state)
}
