//! Axum wiring: routes, status mapping, and the serve loop with
//! snapshot-on-shutdown.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde_json::json;

use crate::state::{BrokerState, StateError};

fn error_response(status: StatusCode, err: &StateError) -> Response {
    let body = json!({"error": {"code": err.code(), "detail": err.detail()}});
    (status, Json(body)).into_response()
}

impl IntoResponse for StateError {
    fn into_response(self) -> Response {
        let status = match &self {
            StateError::NoHierarchy => StatusCode::CONFLICT,
            StateError::Validation(_) => StatusCode::BAD_REQUEST,
            StateError::Unprocessable(_) => StatusCode::UNPROCESSABLE_ENTITY,
        };
        error_response(status, &self)
    }
}

async fn healthz() -> Json<serde_json::Value> {
    Json(json!({"status": "ok"}))
}

async fn put_hierarchy(
    State(state): State<Arc<BrokerState>>,
    body: String,
) -> Result<Json<serde_json::Value>, StateError> {
    let (revision, warnings) = state.set_hierarchy(&body)?;
    Ok(Json(json!({"revision": revision, "warnings": warnings})))
}

async fn put_offering(
    State(state): State<Arc<BrokerState>>,
    Path(id): Path<String>,
    body: String,
) -> Result<Json<serde_json::Value>, StateError> {
    let revision = state.put_offering(&id, &body)?;
    Ok(Json(json!({"revision": revision})))
}

async fn post_rank(
    State(state): State<Arc<BrokerState>>,
    body: Bytes,
) -> Result<Response, StateError> {
    let response = state.rank(&body)?;
    Ok(Json(response).into_response())
}

async fn get_report(
    State(state): State<Arc<BrokerState>>,
    Path(id): Path<String>,
) -> Response {
    match state.get_report(&id) {
        Some(report) => Json(report).into_response(),
        None => (
            StatusCode::NOT_FOUND,
            Json(json!({"error": {"code": "NotFound", "detail": format!("no report {id}")}})),
        )
            .into_response(),
    }
}

/// The broker's HTTP surface over shared state.
pub fn router(state: Arc<BrokerState>) -> Router {
    Router::new()
        .route("/v1/healthz", get(healthz))
        .route("/v1/hierarchy", put(put_hierarchy))
        .route("/v1/offerings/{id}", put(put_offering))
        .route("/v1/rank", post(post_rank))
        .route("/v1/reports/{id}", get(get_report))
        .with_state(state)
}

async fn shutdown_signal() {
    let ctrl_c = async {
        tokio::signal::ctrl_c().await.ok();
    };
    #[cfg(unix)]
    let terminate = async {
        tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate())
            .expect("install SIGTERM handler")
            .recv()
            .await;
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = terminate => {}
    }
}

/// Binds, optionally restores a snapshot, serves until interrupted, then
/// writes the snapshot back. Prints the bound address on startup so callers
/// can discover ephemeral ports.
pub async fn serve(addr: SocketAddr, snapshot: Option<PathBuf>) -> std::io::Result<()> {
    let state = Arc::new(BrokerState::load_or_default(snapshot.as_deref())?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    println!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(shutdown_signal())
        .await?;
    if let Some(path) = &snapshot {
        state.save_snapshot(path)?;
    }
    Ok(())
}
