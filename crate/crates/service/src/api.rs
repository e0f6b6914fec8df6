//! HTTP API and server-push event stream.

use std::convert::Infallible;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use intent_ran::sim::TrafficKind;
use serde::Deserialize;
use serde_json::json;
use tokio::sync::broadcast::error::RecvError;

use crate::live::{CreateRun, Manager, ServiceError, StreamItem};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let (code, kind) = match &self {
            ServiceError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            ServiceError::ServiceUnavailable(_) => (StatusCode::SERVICE_UNAVAILABLE, "service_unavailable"),
            ServiceError::BadRequest(_) => (StatusCode::BAD_REQUEST, "bad_request"),
            ServiceError::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        (code, Json(json!({ "error": kind, "message": self.to_string() }))).into_response()
    }
}

type Shared = Arc<Manager>;

pub fn router(manager: Shared) -> Router {
    Router::new()
        .route("/runs", get(list_runs).post(create_run))
        .route("/runs/{id}", get(get_run))
        .route("/runs/{id}/control", post(control))
        .route("/runs/{id}/intents", post(submit_intent))
        .route("/runs/{id}/what-if", post(what_if))
        .route("/runs/{id}/kpis", get(kpis))
        .route("/runs/{id}/events", get(events))
        .with_state(manager)
}

async fn list_runs(State(m): State<Shared>) -> impl IntoResponse {
    Json(m.list())
}

async fn create_run(State(m): State<Shared>, Json(req): Json<CreateRun>) -> Result<impl IntoResponse, ServiceError> {
    let m2 = m.clone();
    let info = tokio::task::spawn_blocking(move || m2.create(req))
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))??;
    Ok((StatusCode::CREATED, Json(info)))
}

async fn get_run(State(m): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(m.shared(&id)?.info()))
}

#[derive(Debug, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlRequest {
    Start,
    Pause,
    Step { n: u64 },
    Stop,
}

async fn control(
    State(m): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<ControlRequest>,
) -> Result<impl IntoResponse, ServiceError> {
    let info = match req {
        ControlRequest::Start => m.start(&id)?,
        ControlRequest::Pause => m.pause(&id)?,
        ControlRequest::Step { n } => m.step(&id, n).await?,
        ControlRequest::Stop => m.stop(&id).await?,
    };
    Ok(Json(info))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntentRequest {
    pub text: String,
    #[serde(default)]
    pub target_class: Option<TrafficKind>,
}

async fn submit_intent(
    State(m): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<IntentRequest>,
) -> Result<impl IntoResponse, ServiceError> {
    let ev = m.submit(&id, req.text, req.target_class).await?;
    Ok((StatusCode::ACCEPTED, Json(ev)))
}

async fn what_if(
    State(m): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<IntentRequest>,
) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(m.what_if(&id, req.text, req.target_class).await?))
}

#[derive(Debug, Deserialize)]
pub struct Window {
    pub from: Option<u64>,
    pub to: Option<u64>,
}

async fn kpis(State(m): State<Shared>, Path(id): Path<String>, Query(w): Query<Window>) -> Result<impl IntoResponse, ServiceError> {
    let shared = m.shared(&id)?;
    let from = w.from.unwrap_or(0);
    let to = w.to.unwrap_or_else(|| shared.info().ticks);
    if to < from {
        return Err(ServiceError::BadRequest(format!("window end {to} precedes start {from}")));
    }
    Ok(Json(shared.kpis(from, to)))
}

#[derive(Debug, Deserialize)]
pub struct EventQuery {
    /// Resume after this stream id; `Last-Event-ID` takes precedence.
    pub after: Option<u64>,
    pub intent_id: Option<u64>,
}

fn to_event(item: &StreamItem) -> Event {
    Event::default()
        .id(item.id.to_string())
        .event(item.kind.clone())
        .data(serde_json::to_string(&item.data).expect("serialisable"))
}

async fn events(
    State(m): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<EventQuery>,
    headers: HeaderMap,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ServiceError> {
    let shared = m.shared(&id)?;
    let after = headers
        .get("last-event-id")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse().ok())
        .or(q.after)
        .unwrap_or(0);
    let (backlog, rx) = shared.subscribe(after);
    let last = backlog.last().map_or(after, |i| i.id);
    let intent = q.intent_id;
    let keep = move |item: &StreamItem| match intent {
        None => true,
        Some(want) => item.kind == "pipeline" && item.data.get("intent_id").and_then(|v| v.as_u64()) == Some(want),
    };
    let live = stream::unfold((rx, last), |(mut rx, last)| async move {
        loop {
            match rx.recv().await {
                Ok(item) if item.id <= last => continue,
                Ok(item) => {
                    let id = item.id;
                    return Some((item, (rx, id)));
                }
                // a lagging client reconnects and resumes from its last id
                Err(RecvError::Lagged(_)) => return None,
                Err(RecvError::Closed) => return None,
            }
        }
    });
    let keep2 = keep.clone();
    let s = stream::iter(backlog.into_iter().filter(keep))
        .chain(live.filter(move |i| futures::future::ready(keep2(i))))
        .map(|item| Ok(to_event(&item)));
    Ok(Sse::new(s).keep_alive(KeepAlive::default()))
}
