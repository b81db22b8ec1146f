//! HTTP front end over a [`GradingEngine`].
//!
//! Handlers only translate between JSON and engine calls. Engine work is
//! blocking (compiles, child processes, backend calls) and runs on the
//! blocking pool.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use anyhow::{Context, Result};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::oneshot;

use eipe_core::analytics::{
    length_distribution, length_distribution_csv, task_stats, task_stats_csv, StatsOptions,
    DEFAULT_BIN_WIDTH,
};
use eipe_core::bank::obfuscate_identifiers;
use eipe_core::engine::LogFilter;
use eipe_core::{Attempt, GradingEngine, Problem, SubmitError};

use crate::config::ApiConfig;
use crate::setup::build_engine;

pub const IDEMPOTENCY_HEADER: &str = "idempotency-key";

type IdemKey = (String, String, String);
type StoredReply = Arc<tokio::sync::Mutex<Option<(StatusCode, serde_json::Value)>>>;

pub struct AppState {
    pub engine: Arc<GradingEngine>,
    pub redact_observations: bool,
    submissions: Mutex<HashMap<IdemKey, StoredReply>>,
}

impl AppState {
    pub fn new(engine: Arc<GradingEngine>, redact_observations: bool) -> Self {
        Self {
            engine,
            redact_observations,
            submissions: Mutex::new(HashMap::new()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ProblemView {
    pub id: String,
    pub title: String,
    pub statement_code: String,
    pub prompt_prefix: String,
    pub char_limit: Option<u32>,
    pub max_attempts: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub remaining_attempts: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solved: Option<bool>,
}

fn problem_view(engine: &GradingEngine, p: &Problem, user: Option<&str>) -> ProblemView {
    let statement_code = obfuscate_identifiers(&p.reference_source, &p.signature)
        .unwrap_or_else(|_| p.reference_source.clone());
    ProblemView {
        id: p.id.clone(),
        title: p.title.clone(),
        statement_code,
        prompt_prefix: p.prompt_prefix.clone(),
        char_limit: p.char_limit,
        max_attempts: p.max_attempts,
        remaining_attempts: user.and_then(|u| engine.remaining_attempts(u, &p.id).ok()),
        solved: user.map(|u| engine.is_solved(u, &p.id)),
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CaseView {
    pub case_index: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_observation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actual_observation: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct AttemptView {
    pub attempt_id: String,
    pub problem_id: String,
    pub attempt_index: u32,
    pub exploratory: bool,
    pub prompt_text: String,
    pub verdict_kind: String,
    pub generated_code: Option<String>,
    pub case_results: Vec<CaseView>,
    pub submitted_at: String,
}

fn attempt_view(a: &Attempt, reveal: bool) -> AttemptView {
    AttemptView {
        attempt_id: a.attempt_id.clone(),
        problem_id: a.problem_id.clone(),
        attempt_index: a.attempt_index,
        exploratory: a.exploratory,
        prompt_text: a.prompt_text.clone(),
        verdict_kind: a.verdict_kind.to_string(),
        generated_code: a.extracted_source.clone(),
        case_results: a
            .case_results
            .iter()
            .map(|c| CaseView {
                case_index: c.case_index,
                passed: c.passed,
                expected_observation: reveal.then(|| c.expected_observation.clone()),
                actual_observation: reveal.then(|| c.actual_observation.clone()),
            })
            .collect(),
        submitted_at: a.submitted_at.to_rfc3339(),
    }
}

struct ApiError(StatusCode, serde_json::Value);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

fn submit_error(e: &SubmitError) -> (StatusCode, serde_json::Value) {
    let status = match e {
        SubmitError::UnknownProblem(_) => StatusCode::NOT_FOUND,
        SubmitError::UnknownUser | SubmitError::EmptyPrompt(_) => StatusCode::BAD_REQUEST,
        SubmitError::AttemptsExhausted { .. } => StatusCode::CONFLICT,
        SubmitError::CharLimitExceeded { .. } => StatusCode::UNPROCESSABLE_ENTITY,
        SubmitError::Backend(_) | SubmitError::Harness(_) => StatusCode::SERVICE_UNAVAILABLE,
        SubmitError::Log(_) => StatusCode::INTERNAL_SERVER_ERROR,
    };
    let mut body = json!({ "error": e.to_string(), "counted": false });
    if let SubmitError::CharLimitExceeded { limit, actual } = e {
        body["limit"] = json!(limit);
        body["actual"] = json!(actual);
    }
    if let SubmitError::AttemptsExhausted { max } = e {
        body["max_attempts"] = json!(max);
    }
    if e.is_infrastructure() {
        log::error!("submission failed: {e}");
    }
    (status, body)
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

#[derive(Debug, Deserialize)]
struct UserQuery {
    user_id: Option<String>,
}

async fn list_problems(State(st): State<Arc<AppState>>, Query(q): Query<UserQuery>) -> Json<Vec<ProblemView>> {
    let bank = st.engine.bank();
    Json(bank.iter().map(|p| problem_view(&st.engine, p, q.user_id.as_deref())).collect())
}

async fn get_problem(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<UserQuery>,
) -> Result<Json<ProblemView>, ApiError> {
    let p = st
        .engine
        .problem(&id)
        .map_err(|e| ApiError(StatusCode::NOT_FOUND, json!({ "error": e.to_string() })))?;
    Ok(Json(problem_view(&st.engine, &p, q.user_id.as_deref())))
}

#[derive(Debug, Deserialize)]
struct SubmitBody {
    user_id: String,
    prompt_text: String,
}

async fn run_submission(st: Arc<AppState>, problem_id: String, body: SubmitBody) -> (StatusCode, serde_json::Value) {
    let engine = st.engine.clone();
    let redact = st.redact_observations;
    let result = tokio::task::spawn_blocking(move || {
        engine.submit_attempt(&body.user_id, &problem_id, &body.prompt_text)
    })
    .await;
    match result {
        Ok(Ok(out)) => {
            let view = attempt_view(&out.attempt, !redact || out.solved);
            (
                StatusCode::OK,
                json!({
                    "attempt_id": view.attempt_id,
                    "attempt_index": view.attempt_index,
                    "exploratory": view.exploratory,
                    "verdict_kind": view.verdict_kind,
                    "generated_code": view.generated_code,
                    "case_results": view.case_results,
                    "diagnostics": out.diagnostics,
                    "remaining": out.remaining,
                    "solved": out.solved,
                    "submitted_at": view.submitted_at,
                }),
            )
        }
        Ok(Err(e)) => submit_error(&e),
        Err(join) => (
            StatusCode::INTERNAL_SERVER_ERROR,
            json!({ "error": format!("grading task failed: {join}"), "counted": false }),
        ),
    }
}

async fn submit(
    State(st): State<Arc<AppState>>,
    Path(problem_id): Path<String>,
    headers: HeaderMap,
    Json(body): Json<SubmitBody>,
) -> Response {
    let key = headers
        .get(IDEMPOTENCY_HEADER)
        .and_then(|v| v.to_str().ok())
        .filter(|k| !k.is_empty())
        .map(|k| (body.user_id.clone(), problem_id.clone(), k.to_string()));
    let Some(key) = key else {
        let (status, json) = run_submission(st, problem_id, body).await;
        return (status, Json(json)).into_response();
    };
    // a repeated key waits for the first request and gets the same answer
    let slot = st.submissions.lock().entry(key).or_default().clone();
    let mut guard = slot.lock().await;
    if let Some((status, json)) = guard.as_ref() {
        return (*status, Json(json.clone())).into_response();
    }
    let (status, json) = run_submission(st.clone(), problem_id, body).await;
    *guard = Some((status, json.clone()));
    (status, Json(json)).into_response()
}

#[derive(Debug, Deserialize)]
struct HistoryQuery {
    problem: Option<String>,
}

async fn history(
    State(st): State<Arc<AppState>>,
    Path(uid): Path<String>,
    Query(q): Query<HistoryQuery>,
) -> Json<Vec<AttemptView>> {
    let attempts = st.engine.history(&uid, q.problem.as_deref());
    Json(
        attempts
            .iter()
            .map(|a| attempt_view(a, !st.redact_observations || st.engine.is_solved(&uid, &a.problem_id)))
            .collect(),
    )
}

fn csv_response(body: String) -> Response {
    ([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], body).into_response()
}

async fn stats_csv(State(st): State<Arc<AppState>>) -> Response {
    let log = st.engine.export_log(&LogFilter::default());
    csv_response(task_stats_csv(&task_stats(&log, &StatsOptions::default())))
}

#[derive(Debug, Deserialize)]
struct BinQuery {
    bin: Option<usize>,
}

async fn lengths_csv(State(st): State<Arc<AppState>>, Query(q): Query<BinQuery>) -> Result<Response, ApiError> {
    let log = st.engine.export_log(&LogFilter::default());
    let groups = st.engine.bank().groups();
    let hist = length_distribution(&log, q.bin.unwrap_or(DEFAULT_BIN_WIDTH), Some(&groups))
        .map_err(|e| ApiError(StatusCode::BAD_REQUEST, json!({ "error": e.to_string() })))?;
    Ok(csv_response(length_distribution_csv(&hist)))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/problems", get(list_problems))
        .route("/problems/{id}", get(get_problem))
        .route("/problems/{id}/attempts", axum::routing::post(submit))
        .route("/users/{uid}/attempts", get(history))
        .route("/analytics/task-stats", get(stats_csv))
        .route("/analytics/length-distribution", get(lengths_csv))
        .with_state(state)
}

/// A running server. Dropping the handle leaves the server running until
/// the process exits; call [`ServiceHandle::shutdown`] to drain and stop it.
pub struct ServiceHandle {
    pub addr: SocketAddr,
    pub engine: Arc<GradingEngine>,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<std::io::Result<()>>>,
}

impl ServiceHandle {
    /// Stops accepting connections, waits for in-flight requests and joins
    /// the server thread.
    pub fn shutdown(mut self) -> Result<()> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        self.join()
    }

    /// Blocks until the server stops (for example on Ctrl-C).
    pub fn join(&mut self) -> Result<()> {
        match self.thread.take() {
            Some(t) => t.join().map_err(|_| anyhow::anyhow!("server thread panicked"))?.map_err(Into::into),
            None => Ok(()),
        }
    }
}

/// Starts serving `engine` on `addr` in a background thread. Binding
/// happens before this returns, so bind errors surface here.
pub fn serve_engine(engine: Arc<GradingEngine>, addr: SocketAddr, redact: bool, stop_on_ctrl_c: bool) -> Result<ServiceHandle> {
    let listener = std::net::TcpListener::bind(addr).with_context(|| format!("binding {addr}"))?;
    listener.set_nonblocking(true)?;
    let addr = listener.local_addr()?;
    let app = router(Arc::new(AppState::new(engine.clone(), redact)));
    let (tx, rx) = oneshot::channel::<()>();
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    let thread = std::thread::Builder::new().name("eipe-api".into()).spawn(move || {
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener)?;
            let stop = async move {
                if stop_on_ctrl_c {
                    tokio::select! {
                        _ = rx => {}
                        _ = tokio::signal::ctrl_c() => log::info!("interrupt received, draining"),
                    }
                } else {
                    let _ = rx.await;
                }
            };
            axum::serve(listener, app).with_graceful_shutdown(stop).await
        })
    })?;
    Ok(ServiceHandle {
        addr,
        engine,
        stop: Some(tx),
        thread: Some(thread),
    })
}

/// Validates the bank, builds the engine and starts serving.
pub fn serve(config: &ApiConfig) -> Result<ServiceHandle> {
    let engine = Arc::new(build_engine(config)?);
    serve_engine(engine, config.listen, config.redact_observations, true)
}
