//! Control endpoint of a running stack: status, live event stream, traces,
//! reports, prompt and scenario submission, shutdown.
//!
//! | Method | Path               | Body / query                                   |
//! |--------|--------------------|------------------------------------------------|
//! | GET    | `/health`          |                                                |
//! | GET    | `/status`          |                                                |
//! | GET    | `/events`          | `?since=N` replays the log from event N        |
//! | GET    | `/trace`           | `?scope=run\|all&interface=SBI&format=jsonl\|table\|json` |
//! | GET    | `/report`          | latest latency report (JSON)                   |
//! | GET    | `/report.txt`      | same, rendered                                 |
//! | GET    | `/reports/{file}`  | files of the results directory                 |
//! | POST   | `/prompt`          | `{"text": "..."}`                              |
//! | POST   | `/scenario`        | `{"scenario": "...", "repetitions": n, "latencyProfile": "..."}` |
//! | POST   | `/profile`         | `{"name": "fast"}`                             |
//! | POST   | `/shutdown`        |                                                |

use std::convert::Infallible;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::Deserialize;
use serde_json::json;
use tokio::sync::broadcast::error::RecvError;

use crate::profile::LatencyProfile;
use crate::scenario::{run_scenario, ScenarioSpec};
use crate::stack::{Stack, StackRef};
use crate::trace::{export_trace_table, render_table, Interface, TraceEvent};

pub fn router(stack: StackRef) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/status", get(status))
        .route("/events", get(events))
        .route("/trace", get(trace))
        .route("/report", get(report))
        .route("/report.txt", get(report_text))
        .route("/reports/{file}", get(report_file))
        .route("/prompt", post(prompt))
        .route("/scenario", post(scenario))
        .route("/profile", post(profile))
        .route("/shutdown", post(shutdown))
        .with_state(stack)
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

#[allow(clippy::result_large_err)]
fn live(stack: &StackRef) -> Result<Arc<Stack>, Response> {
    stack
        .upgrade()
        .filter(|s| !s.is_stopped())
        .ok_or_else(|| error(StatusCode::SERVICE_UNAVAILABLE, "stack is shutting down"))
}

async fn health(State(stack): State<StackRef>) -> Response {
    match live(&stack) {
        Ok(_) => Json(json!({ "status": "ok" })).into_response(),
        Err(r) => r,
    }
}

async fn status(State(stack): State<StackRef>) -> Response {
    match live(&stack) {
        Ok(s) => Json(s.status()).into_response(),
        Err(r) => r,
    }
}

#[derive(Deserialize)]
struct EventsQuery {
    since: Option<usize>,
}

fn sse_event(ev: &TraceEvent) -> Event {
    Event::default().data(serde_json::to_string(ev).unwrap_or_default())
}

/// Replayed history followed by live events, one JSON record per SSE event.
fn event_stream(stack: &Stack, since: usize) -> impl Stream<Item = Result<Event, Infallible>> + use<> {
    let (history, rx) = stack.collector().subscribe_with_snapshot();
    let replay: Vec<Result<Event, Infallible>> = history.iter().skip(since).map(|e| Ok(sse_event(e))).collect();
    let follow = stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(ev) => return Some((Ok(sse_event(&ev)), rx)),
                Err(RecvError::Lagged(_)) => continue,
                Err(RecvError::Closed) => return None,
            }
        }
    });
    stream::iter(replay).chain(follow)
}

async fn events(State(stack): State<StackRef>, Query(q): Query<EventsQuery>) -> Response {
    match live(&stack) {
        Ok(s) => Sse::new(event_stream(&s, q.since.unwrap_or(0)))
            .keep_alive(KeepAlive::default())
            .into_response(),
        Err(r) => r,
    }
}

#[derive(Deserialize)]
struct TraceQuery {
    scope: Option<String>,
    interface: Option<String>,
    format: Option<String>,
}

async fn trace(State(stack): State<StackRef>, Query(q): Query<TraceQuery>) -> Response {
    let s = match live(&stack) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let events = match q.scope.as_deref().unwrap_or("run") {
        "run" => s.collector().run_events(),
        "all" => s.collector().snapshot(),
        other => return error(StatusCode::BAD_REQUEST, format!("unknown scope {other:?}")),
    };
    let interface = match q.interface.as_deref().map(str::parse::<Interface>).transpose() {
        Ok(i) => i,
        Err(e) => return error(StatusCode::BAD_REQUEST, e),
    };
    match q.format.as_deref().unwrap_or("jsonl") {
        "jsonl" => {
            let body: String = events
                .iter()
                .filter(|e| interface.is_none_or(|i| e.interface == i))
                .map(|e| serde_json::to_string(e).unwrap_or_default() + "\n")
                .collect();
            ([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response()
        }
        "json" => Json(export_trace_table(&events, interface)).into_response(),
        "table" => render_table(&export_trace_table(&events, interface)).into_response(),
        other => error(StatusCode::BAD_REQUEST, format!("unknown format {other:?}")),
    }
}

async fn report(State(stack): State<StackRef>) -> Response {
    match live(&stack) {
        Ok(s) => match s.latest_report() {
            Some(r) => Json(r).into_response(),
            None => error(StatusCode::NOT_FOUND, "no latency report yet"),
        },
        Err(r) => r,
    }
}

async fn report_text(State(stack): State<StackRef>) -> Response {
    match live(&stack) {
        Ok(s) => match s.latest_report() {
            Some(r) => r.render().into_response(),
            None => error(StatusCode::NOT_FOUND, "no latency report yet"),
        },
        Err(r) => r,
    }
}

fn safe_name(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('.')
        && name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'.' | b'-' | b'_'))
}

async fn report_file(State(stack): State<StackRef>, Path(file): Path<String>) -> Response {
    let s = match live(&stack) {
        Ok(s) => s,
        Err(r) => return r,
    };
    if !safe_name(&file) {
        return error(StatusCode::BAD_REQUEST, "invalid file name");
    }
    let path = PathBuf::from(&s.config().results_dir).join(&file);
    match tokio::fs::read(&path).await {
        Ok(bytes) => {
            let ctype = match path.extension().and_then(|e| e.to_str()) {
                Some("json") => "application/json",
                Some("jsonl") => "application/x-ndjson",
                _ => "text/plain; charset=utf-8",
            };
            ([(header::CONTENT_TYPE, ctype)], bytes).into_response()
        }
        Err(_) => error(StatusCode::NOT_FOUND, format!("{file} not found")),
    }
}

#[derive(Deserialize)]
struct PromptBody {
    text: String,
}

async fn prompt(State(stack): State<StackRef>, Json(body): Json<PromptBody>) -> Response {
    match live(&stack) {
        Ok(s) => Json(s.prompt(&body.text).await).into_response(),
        Err(r) => r,
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct ScenarioBody {
    scenario: String,
    repetitions: Option<u32>,
    latency_profile: Option<String>,
}

async fn scenario(State(stack): State<StackRef>, Json(body): Json<ScenarioBody>) -> Response {
    let s = match live(&stack) {
        Ok(s) => s,
        Err(r) => return r,
    };
    let mut spec = match ScenarioSpec::resolve(&body.scenario) {
        Ok(spec) => spec,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    if let Some(n) = body.repetitions {
        spec.repetitions = n;
    }
    if body.latency_profile.is_some() {
        spec.latency_profile = body.latency_profile;
    }
    match run_scenario(&s, &spec).await {
        Ok(outcome) => {
            if let Err(e) = outcome.write_results(std::path::Path::new(&s.config().results_dir)) {
                tracing::warn!("cannot write results: {e}");
            }
            Json(outcome).into_response()
        }
        Err(e) => error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
    }
}

#[derive(Deserialize)]
struct ProfileBody {
    name: String,
}

async fn profile(State(stack): State<StackRef>, Json(body): Json<ProfileBody>) -> Response {
    let s = match live(&stack) {
        Ok(s) => s,
        Err(r) => return r,
    };
    match LatencyProfile::select(&body.name) {
        Ok(p) => {
            s.apply_profile(&p);
            Json(p).into_response()
        }
        Err(e) => error(StatusCode::BAD_REQUEST, e.to_string()),
    }
}

async fn shutdown(State(stack): State<StackRef>) -> Response {
    match live(&stack) {
        Ok(s) => {
            s.request_shutdown();
            (StatusCode::ACCEPTED, Json(json!({ "status": "shutting down" }))).into_response()
        }
        Err(r) => r,
    }
}
