//! HTTP API: `POST /ask`, `GET /healthz`, `GET /metrics`.

use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use kgqa_core::{QaEngine, QaStatus};
use serde_json::json;
use tokio::net::TcpListener;
use tower_http::cors::CorsLayer;

use crate::fallback::FallbackClient;
use crate::metrics::{Outcome, ServiceMetrics};
use crate::response::{AskRequest, AskResponse, Source};

#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<QaEngine>,
    pub metrics: Arc<ServiceMetrics>,
    pub fallback: Option<FallbackClient>,
}

impl AppState {
    pub fn new(engine: QaEngine, fallback: Option<FallbackClient>) -> Self {
        AppState {
            engine: Arc::new(engine),
            metrics: Arc::new(ServiceMetrics::default()),
            fallback,
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/ask", post(ask))
        .route("/healthz", get(healthz))
        .route("/metrics", get(metrics))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn bad_request(message: impl Into<String>) -> Response {
    (
        StatusCode::BAD_REQUEST,
        Json(json!({ "error": message.into() })),
    )
        .into_response()
}

async fn ask(State(state): State<AppState>, body: Bytes) -> Response {
    if body.iter().all(u8::is_ascii_whitespace) {
        return bad_request("request body is empty");
    }
    let request: AskRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return bad_request(format!("expected {{\"question\": string}}: {e}")),
    };

    let started = Instant::now();
    let result = state.engine.answer(&request.question);
    let mut response = AskResponse::from(&result);
    let mut outcome = Outcome::Status(result.status);

    if result.status == QaStatus::NoAnswer {
        if let Some(fallback) = &state.fallback {
            if let Some(fa) = fallback.ask(&request.question).await {
                response = AskResponse {
                    status: QaStatus::Answered,
                    answer: Some(fa.answer),
                    entity: fa.entity,
                    predicate: fa.predicate,
                    score: fa.score,
                    latency_ms: started.elapsed().as_secs_f64() * 1000.0,
                    source: Source::Fallback,
                };
                outcome = Outcome::FallbackAnswered;
            }
        }
    }
    state
        .metrics
        .record(outcome, started.elapsed().as_secs_f64() * 1000.0);
    tracing::debug!(status = ?response.status, source = ?response.source, "answered");
    Json(response).into_response()
}

async fn healthz(State(state): State<AppState>) -> Response {
    Json(json!({ "status": "ok", "entities": state.engine.index().len() })).into_response()
}

async fn metrics(State(state): State<AppState>) -> Response {
    Json(state.metrics.snapshot()).into_response()
}
