//! HTTP play service: a human plays hand cricket (or any solvable RUC game) round by
//! round against a bot that samples its frozen equilibrium strategy.
//!
//! Endpoints: `POST /games`, `POST /games/{id}/moves`, `GET /games/{id}`, `GET /healthz`.

pub mod session;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;

use ruc_core::report::{Document, ErrorReport};

pub use session::{
    CreateRequest, GameSpec, RoundOutcome, RoundRecord, SessionError, SessionState,
    SessionStore, SessionSummary, SessionView, StoreConfig, Totals,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRequest {
    pub action: usize,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            code: "InvalidRequest",
            message: message.into(),
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let (status, code, message) = match e {
            SessionError::Unsolvable(m) => (StatusCode::UNPROCESSABLE_ENTITY, "UnsolvableSpec", m),
            SessionError::UnknownSession(id) => {
                (StatusCode::NOT_FOUND, "UnknownSession", format!("no session {id}"))
            }
            SessionError::Finished => (
                StatusCode::CONFLICT,
                "SessionFinished",
                "the session has already finished".into(),
            ),
            SessionError::ActionOutOfRange { action, n } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                "ActionOutOfRange",
                format!("action {action} is outside 0..{n}"),
            ),
            SessionError::Capacity(max) => (
                StatusCode::SERVICE_UNAVAILABLE,
                "CapacityExceeded",
                format!("session limit of {max} reached"),
            ),
            SessionError::Transcript(m) => {
                (StatusCode::INTERNAL_SERVER_ERROR, "TranscriptError", m)
            }
        };
        Self {
            status,
            code,
            message,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Document::new(
            "error",
            ErrorReport {
                code: self.code.into(),
                message: self.message,
            },
        );
        (self.status, Json(body)).into_response()
    }
}

type Shared = Arc<SessionStore>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::invalid(e.to_string()))
}

async fn create_game(State(store): State<Shared>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateRequest = parse_body(&body)?;
    let spec = req.spec.clone();
    let game = tokio::task::spawn_blocking(move || session::solve_spec(&spec))
        .await
        .map_err(|e| SessionError::Unsolvable(e.to_string()))??;
    let summary = store.insert(&req, game)?;
    Ok((StatusCode::CREATED, Json(Document::new("create_session", summary))).into_response())
}

async fn submit_move(
    State(store): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Document<RoundOutcome>>, ApiError> {
    let req: MoveRequest = parse_body(&body)?;
    let outcome = store.with_session(&id, |s| s.play(req.action))?;
    Ok(Json(Document::new("submit_move", outcome)))
}

async fn get_game(
    State(store): State<Shared>,
    Path(id): Path<String>,
) -> Result<Json<Document<SessionView>>, ApiError> {
    let view = store.with_session(&id, |s| Ok(s.view()))?;
    Ok(Json(Document::new("get_session", view)))
}

async fn healthz(State(store): State<Shared>) -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok", "sessions": store.len() }))
}

pub fn router(store: Shared) -> Router {
    Router::new()
        .route("/games", post(create_game))
        .route("/games/{id}", get(get_game))
        .route("/games/{id}/moves", post(submit_move))
        .route("/healthz", get(healthz))
        .layer(CorsLayer::permissive())
        .with_state(store)
}

/// Binds `addr` and serves until the process is stopped, sweeping idle sessions in the
/// background.
pub async fn serve(addr: SocketAddr, config: StoreConfig) -> std::io::Result<()> {
    let store = Arc::new(SessionStore::new(config));
    let period = store.config().ttl.clamp(Duration::from_secs(1), Duration::from_secs(60));
    let sweeper = Arc::clone(&store);
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            sweeper.sweep();
        }
    });
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(store)).await
}
