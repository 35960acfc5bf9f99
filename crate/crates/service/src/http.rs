use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;

use recexp_core::analytics::CorrelationSource;
use recexp_core::domain::{ExplanationStyle, MetricId};
use recexp_core::protocol::Participant;
use recexp_core::report::{render, AnalysisOptions, Format, Table};
use recexp_core::{Error as CoreError, ProtocolError};

use crate::store::{Command, Store, StoreError};

pub const IDEMPOTENCY_HEADER: &str = "idempotency-key";

pub struct ApiError(StoreError);

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            StoreError::NotFound(_) => StatusCode::NOT_FOUND,
            StoreError::Protocol(p) => match p {
                ProtocolError::WrongPhase { .. } | ProtocolError::Duplicate(_) | ProtocolError::OutOfOrder(_) => {
                    StatusCode::CONFLICT
                }
                ProtocolError::NoSuchTask(_) => StatusCode::NOT_FOUND,
                ProtocolError::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
            },
            StoreError::Malformed(_) => StatusCode::UNPROCESSABLE_ENTITY,
            StoreError::NoCompleteSessions | StoreError::Core(CoreError::TooFewObservations { .. }) => {
                StatusCode::CONFLICT
            }
            StoreError::Core(CoreError::Invalid { .. } | CoreError::ScoreOutOfRange(_)) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            StoreError::Core(_) | StoreError::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            tracing::error!(error = %self.0, "request failed");
        }
        (status, Json(json!({ "error": self.0.to_string() }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, StoreError> {
    serde_json::from_slice(bytes).map_err(|e| StoreError::Malformed(format!("request body: {e}")))
}

fn idempotency_key(headers: &HeaderMap) -> Option<String> {
    headers
        .get(IDEMPOTENCY_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::to_owned)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, StoreError> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .expect("store operation panicked")
        .map_err(ApiError)
}

type AppState = Arc<Store>;

async fn create_session(State(store): State<AppState>, headers: HeaderMap, bytes: Bytes) -> ApiResult<Response> {
    let participant: Participant = body(&bytes)?;
    let key = idempotency_key(&headers);
    let view = blocking(move || {
        let ack = store.create(participant, key.as_deref())?;
        store.next(&ack.session_id)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn get_session(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let s = blocking(move || store.session(&id)).await?;
    Ok(Json(json!({
        "session_id": s.session_id,
        "phase": s.phase,
        "version": s.version,
    }))
    .into_response())
}

async fn next_task(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(blocking(move || store.next(&id)).await?).into_response())
}

async fn submit(store: AppState, id: String, command: Command, headers: &HeaderMap) -> ApiResult<Response> {
    let key = idempotency_key(headers);
    let ack = blocking(move || store.submit(&id, command, key.as_deref())).await?;
    Ok(Json(ack).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeedBody {
    task_index: usize,
    score: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplanationBody {
    r: i64,
    t_ms: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DetailBody {
    r_prime: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LikertBody {
    style: String,
    metric: String,
    score: i64,
}

fn trial_index(k: &str) -> Result<usize, StoreError> {
    k.parse()
        .map_err(|_| StoreError::Protocol(ProtocolError::NoSuchTask(format!("trial {k}"))))
}

async fn seed_rating(
    State(store): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Response> {
    let b: SeedBody = body(&bytes)?;
    let command = Command::Seed {
        task_index: b.task_index,
        score: b.score,
    };
    submit(store, id, command, &headers).await
}

async fn explanation_rating(
    State(store): State<AppState>,
    Path((id, k)): Path<(String, String)>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Response> {
    let trial_index = trial_index(&k)?;
    let b: ExplanationBody = body(&bytes)?;
    let command = Command::Explanation {
        trial_index,
        r: b.r,
        t_ms: b.t_ms,
    };
    submit(store, id, command, &headers).await
}

async fn detail_rating(
    State(store): State<AppState>,
    Path((id, k)): Path<(String, String)>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Response> {
    let trial_index = trial_index(&k)?;
    let b: DetailBody = body(&bytes)?;
    submit(
        store,
        id,
        Command::Detail {
            trial_index,
            r_prime: b.r_prime,
        },
        &headers,
    )
    .await
}

async fn likert(
    State(store): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    bytes: Bytes,
) -> ApiResult<Response> {
    let b: LikertBody = body(&bytes)?;
    let malformed = |e: CoreError| StoreError::Malformed(e.to_string());
    let style: ExplanationStyle = b.style.parse().map_err(malformed)?;
    let metric: MetricId = b.metric.parse().map_err(malformed)?;
    let command = Command::Likert {
        style,
        metric,
        score: b.score,
    };
    submit(store, id, command, &headers).await
}

async fn export(State(store): State<AppState>, Query(q): Query<HashMap<String, String>>) -> ApiResult<Response> {
    match q.get("format").map(String::as_str) {
        None | Some("ndjson") => {}
        Some(other) => return Err(StoreError::Malformed(format!("unsupported export format {other:?}")).into()),
    }
    let text = blocking(move || store.export()).await?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response())
}

async fn analysis(
    State(store): State<AppState>,
    Path(table): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Response> {
    let table = match table.as_str() {
        "objective" | "subjective" | "correlation" | "fuzzy" | "significance" => table.parse::<Table>(),
        _ => return Err(StoreError::NotFound(format!("analysis table {table}")).into()),
    }
    .map_err(|e| StoreError::Malformed(e.to_string()))?;
    let mut opts = AnalysisOptions::default();
    if let Some(s) = q.get("source") {
        opts.correlation_source = s
            .parse::<CorrelationSource>()
            .map_err(|e| StoreError::Malformed(e.to_string()))?;
    }
    let text = blocking(move || {
        let sessions = store.snapshot()?;
        Ok(render(table, &sessions, &opts, Format::Json)?)
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, "application/json")], text).into_response())
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/next", get(next_task))
        .route("/sessions/{id}/seed-ratings", post(seed_rating))
        .route("/sessions/{id}/trials/{k}/explanation-rating", post(explanation_rating))
        .route("/sessions/{id}/trials/{k}/detail-rating", post(detail_rating))
        .route("/sessions/{id}/likert", post(likert))
        .route("/export", get(export))
        .route("/analysis/{table}", get(analysis))
        .with_state(store)
}
