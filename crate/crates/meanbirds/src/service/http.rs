use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::json;
use tokio::net::TcpListener;

use super::{LabelSubmission, Registration, Rejection, Service};

impl IntoResponse for Rejection {
    fn into_response(self) -> Response {
        let status = match &self {
            Rejection::BadRequest(_) => StatusCode::BAD_REQUEST,
            Rejection::NotFound(_) => StatusCode::NOT_FOUND,
            Rejection::Conflict(_) => StatusCode::CONFLICT,
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

type Shared = State<Arc<Service>>;

async fn register(State(s): Shared, Json(reg): Json<Registration>) -> Result<Response, Rejection> {
    let worker_id = s.register(reg)?;
    Ok((StatusCode::CREATED, Json(json!({ "worker_id": worker_id }))).into_response())
}

async fn assignment(State(s): Shared, Path(id): Path<String>) -> Result<Response, Rejection> {
    Ok(Json(s.assignment(&id)?).into_response())
}

async fn label(State(s): Shared, Json(sub): Json<LabelSubmission>) -> Result<Response, Rejection> {
    Ok((StatusCode::CREATED, Json(s.submit(sub)?)).into_response())
}

async fn stats(State(s): Shared) -> Response {
    Json(s.stats()).into_response()
}

async fn export(State(s): Shared) -> Response {
    Json(s.export()).into_response()
}

async fn definitions(State(s): Shared) -> String {
    s.config().definitions.clone()
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/workers", post(register))
        .route("/workers/{id}/assignment", get(assignment))
        .route("/labels", post(label))
        .route("/stats", get(stats))
        .route("/export/groundtruth", get(export))
        .route("/definitions", get(definitions))
        .with_state(service)
}

/// Serve until the listener fails or ctrl-c arrives.
pub async fn serve(listener: TcpListener, service: Arc<Service>) -> std::io::Result<()> {
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
