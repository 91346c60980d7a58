//! Read-only HTTP JSON API over one model snapshot.
//!
//! Requests work on an `Arc` of the snapshot taken at the start of the
//! request; `POST /api/reload` builds a new snapshot and swaps it in whole,
//! so no request sees a partly loaded model.

use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::api::{self, ApiError, ApiQuantifyRequest, LoadError, ModelSource, Snapshot};

pub struct AppState {
    source: ModelSource,
    snapshot: RwLock<Arc<Snapshot>>,
}

impl AppState {
    pub fn new(snapshot: Snapshot) -> Arc<AppState> {
        Arc::new(AppState { source: snapshot.source.clone(), snapshot: RwLock::new(Arc::new(snapshot)) })
    }

    pub fn current(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    /// Re-read the model; the old snapshot stays in place on failure.
    pub fn reload(&self) -> Result<Arc<Snapshot>, LoadError> {
        let fresh = Arc::new(Snapshot::load(self.source.clone())?);
        *self.snapshot.write().expect("snapshot lock") = fresh.clone();
        Ok(fresh)
    }
}

fn reply<T: Serialize>(r: Result<T, ApiError>) -> Response {
    match r {
        Ok(v) => Json(v).into_response(),
        Err(e) => {
            let status = StatusCode::from_u16(e.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            (status, Json(e.body())).into_response()
        }
    }
}

/// An empty body means an empty request.
fn request(body: &Bytes) -> Result<ApiQuantifyRequest, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(ApiQuantifyRequest::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("MALFORMED_REQUEST", e.to_string()))
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(f).await.unwrap_or_else(|e| {
        Err(ApiError { status: 500, code: "INTERNAL".into(), message: e.to_string(), id: None })
    })
}

async fn model(State(state): State<Arc<AppState>>) -> Response {
    Json(api::model_view(&state.current())).into_response()
}

async fn quantify(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let snap = state.current();
    reply(blocking(move || api::quantify(&snap, &request(&body)?)).await)
}

async fn importance(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let snap = state.current();
    reply(blocking(move || api::importance(&snap, &request(&body)?)).await)
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CutsetQuery {
    max_order: Option<usize>,
}

async fn cutsets(State(state): State<Arc<AppState>>, q: Result<Query<CutsetQuery>, QueryRejection>) -> Response {
    let max_order = match q {
        Ok(Query(q)) => q.max_order,
        Err(e) => return reply::<()>(Err(ApiError::bad_request("MALFORMED_REQUEST", e.body_text()))),
    };
    let snap = state.current();
    reply(blocking(move || api::cutsets(&snap, max_order, &Default::default())).await)
}

async fn portfolios(State(state): State<Arc<AppState>>) -> Response {
    let snap = state.current();
    reply(blocking(move || api::portfolios(&snap, &ApiQuantifyRequest::default())).await)
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct Reloaded {
    name: String,
    stats: pathrisk::ExpansionStats,
}

async fn reload(State(state): State<Arc<AppState>>) -> Response {
    let r = blocking(move || {
        state.reload().map_err(|e| ApiError {
            status: 409,
            code: "MODEL_INVALID".into(),
            message: e.lines().join("\n"),
            id: None,
        })
    })
    .await;
    reply(r.map(|s| Reloaded { name: s.flat.name().to_string(), stats: pathrisk::stats(&s.flat) }))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/model", get(model))
        .route("/api/quantify", post(quantify))
        .route("/api/cutsets", get(cutsets))
        .route("/api/importance", post(importance))
        .route("/api/portfolios", get(portfolios))
        .route("/api/reload", post(reload))
        .with_state(state)
}

pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("serving {} on http://{}", state.source.display(), listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
