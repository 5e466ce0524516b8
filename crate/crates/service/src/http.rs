//! JSON-over-HTTP API.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use personable_core::ebg::TemplateError;
use personable_core::mapper::MapError;
use personable_core::PeError;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::ServiceError;
use crate::manager::{DeriveRequest, NewSession, NewSite, SessionManager};

pub type AppState = Arc<SessionManager>;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::UnknownSite(_)
            | ServiceError::UnknownTemplate(_)
            | ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::SiteExists(_)
            | ServiceError::ScopeMismatch { .. }
            | ServiceError::SessionNotActive { .. }
            | ServiceError::NotSaved { .. }
            | ServiceError::NotCompleted { .. }
            | ServiceError::ConflictsWithSession { .. }
            | ServiceError::Map(MapError::Contradiction { .. })
            | ServiceError::Template(TemplateError::ScopeViolation { .. }) => StatusCode::CONFLICT,
            ServiceError::Store(_)
            | ServiceError::InvariantViolated { .. }
            | ServiceError::ReplayDiverged { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        let detail = match &self {
            ServiceError::Map(MapError::Contradiction { chain, .. }) => json!({ "derivation": chain }),
            ServiceError::Pe(PeError::NoSuchEdge { page, variable }) => {
                json!({ "page": page, "variable": variable })
            }
            _ => serde_json::Value::Null,
        };
        let body = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "detail": detail,
        });
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ServiceError>;

#[derive(Debug, Deserialize)]
struct UserQuery {
    user: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ChoicesQuery {
    attribute: String,
}

#[derive(Debug, Deserialize)]
struct ClickBody {
    variable: String,
}

#[derive(Debug, Deserialize)]
struct TermsBody {
    terms: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct FormBody {
    slot: String,
    value: String,
}

#[derive(Debug, Serialize)]
struct Choices {
    attribute: String,
    values: Vec<String>,
}

pub fn router(manager: AppState) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/sites", get(list_sites).post(add_site))
        .route("/sites/{id}", get(site))
        .route("/sites/{id}/analysis", get(analysis))
        .route("/sites/{id}/templates", get(templates).post(derive))
        .route("/sessions", get(list_sessions).post(create_session))
        .route("/sessions/{id}/page", get(page))
        .route("/sessions/{id}/click", post(click))
        .route("/sessions/{id}/out-of-turn", post(out_of_turn))
        .route("/sessions/{id}/form", post(form))
        .route("/sessions/{id}/choices", get(choices))
        .route("/sessions/{id}/save", post(save))
        .route("/sessions/{id}/resume", post(resume))
        .route("/sessions/{id}/trace", get(trace).post(record_trace))
        .with_state(manager)
}

async fn list_sites(State(m): State<AppState>) -> Json<serde_json::Value> {
    Json(json!(m.sites()))
}

async fn add_site(State(m): State<AppState>, Json(req): Json<NewSite>) -> Result<(StatusCode, Json<serde_json::Value>), ServiceError> {
    let summary = m.add_site(req)?;
    Ok((StatusCode::CREATED, Json(json!(summary))))
}

async fn site(State(m): State<AppState>, Path(id): Path<String>) -> ApiResult<serde_json::Value> {
    Ok(Json(json!(m.site_summary(&id)?)))
}

async fn analysis(State(m): State<AppState>, Path(id): Path<String>) -> ApiResult<serde_json::Value> {
    Ok(Json(json!(m.analysis(&id)?)))
}

async fn templates(
    State(m): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<UserQuery>,
) -> ApiResult<serde_json::Value> {
    Ok(Json(json!(m.templates(&id, q.user.as_deref())?)))
}

async fn derive(
    State(m): State<AppState>,
    Path(id): Path<String>,
    body: Option<Json<DeriveRequest>>,
) -> ApiResult<serde_json::Value> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    Ok(Json(json!(m.derive(&id, req)?)))
}

async fn list_sessions(State(m): State<AppState>) -> Json<Vec<String>> {
    Json(m.session_ids())
}

async fn create_session(
    State(m): State<AppState>,
    Json(req): Json<NewSession>,
) -> Result<(StatusCode, Json<serde_json::Value>), ServiceError> {
    let view = m.create_session(req)?;
    Ok((StatusCode::CREATED, Json(json!(view))))
}

async fn page(State(m): State<AppState>, Path(id): Path<String>) -> ApiResult<serde_json::Value> {
    Ok(Json(json!(m.page(&id)?)))
}

async fn click(
    State(m): State<AppState>,
    Path(id): Path<String>,
    Json(b): Json<ClickBody>,
) -> ApiResult<serde_json::Value> {
    Ok(Json(json!(m.click(&id, &b.variable)?)))
}

async fn out_of_turn(
    State(m): State<AppState>,
    Path(id): Path<String>,
    Json(b): Json<TermsBody>,
) -> ApiResult<serde_json::Value> {
    Ok(Json(json!(m.out_of_turn(&id, &b.terms)?)))
}

async fn form(
    State(m): State<AppState>,
    Path(id): Path<String>,
    Json(b): Json<FormBody>,
) -> ApiResult<serde_json::Value> {
    Ok(Json(json!(m.fill(&id, &b.slot, &b.value)?)))
}

async fn choices(
    State(m): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ChoicesQuery>,
) -> ApiResult<Choices> {
    let values = m.choices(&id, &q.attribute)?;
    Ok(Json(Choices {
        attribute: q.attribute,
        values,
    }))
}

async fn save(State(m): State<AppState>, Path(id): Path<String>) -> ApiResult<serde_json::Value> {
    Ok(Json(json!(m.save(&id)?)))
}

async fn resume(State(m): State<AppState>, Path(id): Path<String>) -> ApiResult<serde_json::Value> {
    Ok(Json(json!(m.resume(&id)?)))
}

async fn trace(State(m): State<AppState>, Path(id): Path<String>) -> ApiResult<serde_json::Value> {
    Ok(Json(json!(m.trace(&id)?)))
}

async fn record_trace(State(m): State<AppState>, Path(id): Path<String>) -> ApiResult<serde_json::Value> {
    Ok(Json(json!(m.record_trace(&id)?)))
}

/// Serves until ctrl-c.
pub async fn serve(manager: AppState, addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(manager))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
