#![allow(dead_code)]

use std::path::Path;
use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use recexp_core::protocol::StudyContext;
use recexp_core::recommender::{RecommenderConfig, RecommenderModel};
use recexp_core::synthetic::{generate, SyntheticConfig};
use recexp_service::store::seeded_ids;
use recexp_service::{router, Store};

pub const FIXED_MS: i64 = 1_750_000_000_000;

pub fn context() -> Arc<StudyContext> {
    static CTX: OnceLock<Arc<StudyContext>> = OnceLock::new();
    CTX.get_or_init(|| {
        let ds = generate(&SyntheticConfig::default()).unwrap();
        let model = RecommenderModel::fit(&ds, RecommenderConfig::default()).unwrap();
        Arc::new(StudyContext::new(ds, model))
    })
    .clone()
}

pub fn open_store(log: &Path) -> Arc<Store> {
    Arc::new(Store::open(log, context(), 99, Arc::new(|| FIXED_MS), seeded_ids(1)).unwrap())
}

pub fn participant() -> Value {
    json!({
        "age_band": "25-34",
        "gender": "female",
        "education": "graduate",
        "occupation": "engineer",
        "watching_frequency": "weekly"
    })
}

pub struct Reply {
    pub status: StatusCode,
    pub text: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("{e}: {}", self.text))
    }
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<&Value>, key: Option<&str>) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(k) = key {
        req = req.header("idempotency-key", k);
    }
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        text: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

pub fn app(store: Arc<Store>) -> Router {
    router(store)
}

/// The next write of a scripted participant, chosen from GET /next. Returns
/// `None` once the session is complete.
pub fn scripted_write(session_id: &str, next: &Value, step: usize) -> Option<(String, Value)> {
    let task = &next["task"];
    let base = format!("/sessions/{session_id}");
    match task["kind"].as_str().unwrap() {
        "seed" => Some((
            format!("{base}/seed-ratings"),
            json!({ "task_index": task["task_index"], "score": (step % 5) + 1 }),
        )),
        "explanation" => Some((
            format!("{base}/trials/{}/explanation-rating", task["trial_index"]),
            json!({ "r": 4, "t_ms": 3000 + step }),
        )),
        "detail" => Some((
            format!("{base}/trials/{}/detail-rating", task["trial_index"]),
            json!({ "r_prime": 3 }),
        )),
        "likert" => Some((
            format!("{base}/likert"),
            json!({ "style": task["style"], "metric": task["metric"], "score": (step % 5) + 1 }),
        )),
        "complete" => None,
        other => panic!("unknown task kind {other}"),
    }
}

/// Runs one full session in-process; returns its id.
pub async fn run_session(app: &Router) -> String {
    let created = call(app, "POST", "/sessions", Some(&participant()), None).await;
    assert_eq!(created.status, StatusCode::CREATED, "{}", created.text);
    let id = created.json()["session_id"].as_str().unwrap().to_owned();
    let mut step = 0;
    loop {
        let next = call(app, "GET", &format!("/sessions/{id}/next"), None, None)
            .await
            .json();
        let Some((uri, body)) = scripted_write(&id, &next, step) else {
            break;
        };
        let r = call(app, "POST", &uri, Some(&body), Some(&format!("k{step}"))).await;
        assert_eq!(r.status, StatusCode::OK, "{uri}: {}", r.text);
        step += 1;
    }
    id
}
