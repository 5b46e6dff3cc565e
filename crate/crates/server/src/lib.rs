//! HTTP service over a loaded theory graph: graph and node queries, filter
//! state, background layout jobs with server-sent progress events, and the
//! static viewer assets.

pub mod error;
pub mod jobs;

use std::collections::HashMap;
use std::convert::Infallible;
use std::future::Future;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream};
use serde::Serialize;
use serde_json::json;
use tgforge_core::graph::{graph_to_json, TheoryGraph};
use tgforge_core::layout::LayoutFile;
use tgforge_core::ops::{apply_filter, FilterSpec, VisibleSubgraph};
use tgforge_core::{Layout, LayoutParams, ParamsPatch};
use tokio::sync::broadcast::error::RecvError;
use tower_http::services::ServeDir;

pub use error::ApiError;
pub use jobs::{Job, JobState, ProgressMessage};

/// Filter and layout currently shown to clients.
#[derive(Debug, Default)]
pub struct Session {
    pub filter: FilterSpec,
    pub layout: Option<Layout>,
}

pub struct AppState {
    pub graph: Arc<TheoryGraph>,
    pub session: RwLock<Session>,
    jobs: Mutex<HashMap<String, Arc<Job>>>,
    next_job: AtomicU64,
    pub static_dir: Option<PathBuf>,
    /// Emit a progress event every this many iterations.
    pub snapshot_every: usize,
    pub pool: Option<Arc<rayon::ThreadPool>>,
}

impl AppState {
    pub fn new(graph: TheoryGraph) -> Self {
        Self {
            graph: Arc::new(graph),
            session: RwLock::new(Session::default()),
            jobs: Mutex::new(HashMap::new()),
            next_job: AtomicU64::new(1),
            static_dir: None,
            snapshot_every: 5,
            pool: None,
        }
    }

    pub fn with_static_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.static_dir = Some(dir.into());
        self
    }

    pub fn with_snapshot_every(mut self, every: usize) -> Self {
        self.snapshot_every = every.max(1);
        self
    }

    /// Runs layout jobs inside `pool` instead of the global rayon pool.
    pub fn with_pool(mut self, pool: rayon::ThreadPool) -> Self {
        self.pool = Some(Arc::new(pool));
        self
    }

    pub fn job(&self, id: &str) -> Option<Arc<Job>> {
        self.jobs.lock().unwrap().get(id).cloned()
    }
}

pub type SharedState = Arc<AppState>;

pub fn router(state: SharedState) -> Router {
    let api = Router::new()
        .route("/api/graph", get(get_graph))
        .route("/api/layout", get(get_current_layout).post(start_layout))
        .route("/api/layout/{id}", get(job_status))
        .route("/api/layout/{id}/events", get(job_events))
        .route("/api/layout/{id}/stop", post(stop_job))
        .route("/api/filter", get(get_filter).post(set_filter))
        .route("/api/node/{id}", get(get_node));
    let app = match &state.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(index_page)),
    };
    app.with_state(state)
}

/// Serves until `shutdown` resolves, then stops any running layout job.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: SharedState,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let app = router(state.clone());
    let result = axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await;
    for job in state.jobs.lock().unwrap().values() {
        job.request_stop();
    }
    result
}

fn json_utf8(value: &impl Serialize) -> Response {
    let body = serde_json::to_vec(value).expect("response serializes");
    (
        [(header::CONTENT_TYPE, "application/json; charset=utf-8")],
        body,
    )
        .into_response()
}

async fn get_graph(State(state): State<SharedState>) -> Response {
    json_utf8(&graph_to_json(&state.graph))
}

async fn get_current_layout(State(state): State<SharedState>) -> Result<Response, ApiError> {
    let session = state.session.read().unwrap();
    match &session.layout {
        Some(layout) => Ok(json_utf8(&LayoutFile::new(layout, None))),
        None => Err(ApiError::not_found("no layout has been computed yet")),
    }
}

fn parse_params(body: &[u8]) -> Result<LayoutParams, ApiError> {
    let patch: ParamsPatch = if body.iter().all(u8::is_ascii_whitespace) {
        ParamsPatch::default()
    } else {
        serde_json::from_slice(body)
            .map_err(|e| ApiError::bad_request("invalid_params", e.to_string()))?
    };
    let params = patch.resolve()?;
    params.validate()?;
    Ok(params)
}

async fn start_layout(State(state): State<SharedState>, body: Bytes) -> Result<Response, ApiError> {
    let params = parse_params(&body)?;
    let job = {
        let mut jobs = state.jobs.lock().unwrap();
        if let Some(running) = jobs.values().find(|j| !j.state().is_terminal()) {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "job_running",
                format!("layout job {} is still running", running.id),
            ));
        }
        let id = format!("job-{}", state.next_job.fetch_add(1, Ordering::SeqCst));
        let job = Arc::new(Job::new(id.clone(), params));
        jobs.insert(id, job.clone());
        job
    };
    log::info!("starting layout {}", job.id);

    let worker = job.clone();
    let shared = state.clone();
    tokio::task::spawn_blocking(move || {
        let pool = shared.pool.clone();
        worker.run(
            &shared.graph,
            shared.snapshot_every,
            pool.as_deref(),
            |layout| {
                shared.session.write().unwrap().layout = Some(layout.clone());
            },
        );
        log::info!("layout {} finished: {:?}", worker.id, worker.state());
    });

    let body = json!({ "jobId": job.id, "state": job.state() });
    Ok((StatusCode::ACCEPTED, Json(body)).into_response())
}

fn find_job(state: &AppState, id: &str) -> Result<Arc<Job>, ApiError> {
    state
        .job(id)
        .ok_or_else(|| ApiError::not_found(format!("unknown job {id:?}")))
}

async fn job_status(
    State(state): State<SharedState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let job = find_job(&state, &id)?;
    let body = job.with_status(|s| {
        json!({
            "jobId": job.id,
            "state": s.state,
            "iteration": s.latest.as_ref().map_or(0, |m| m.iteration),
            "maxDisplacement": s.latest.as_ref().map(|m| m.max_displacement),
            "meanEdgeLength": s.latest.as_ref().map(|m| m.mean_edge_length),
            "converged": s.state == JobState::Converged,
            "error": s.error,
            "params": job.params,
        })
    });
    Ok(json_utf8(&body))
}

async fn stop_job(
    State(state): State<SharedState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let job = find_job(&state, &id)?;
    job.request_stop();
    Ok((
        StatusCode::ACCEPTED,
        Json(json!({ "jobId": job.id, "state": job.state() })),
    )
        .into_response())
}

fn to_event(message: &ProgressMessage) -> Event {
    let name = if message.terminal { "done" } else { "progress" };
    Event::default()
        .event(name)
        .json_data(message)
        .expect("progress serializes")
}

enum Feed {
    Live {
        rx: tokio::sync::broadcast::Receiver<ProgressMessage>,
        last: Option<usize>,
    },
    Finished(Option<ProgressMessage>),
}

/// Progress events with strictly increasing iterations, then one `done` event.
fn progress_stream(job: &Job) -> impl Stream<Item = Result<Event, Infallible>> {
    let (rx, terminal) = job.subscribe();
    let start = match terminal {
        Some(message) => Feed::Finished(Some(message)),
        None => Feed::Live { rx, last: None },
    };
    stream::unfold(start, |feed| async move {
        match feed {
            Feed::Finished(Some(message)) => Some((Ok(to_event(&message)), Feed::Finished(None))),
            Feed::Finished(None) => None,
            Feed::Live { mut rx, mut last } => loop {
                match rx.recv().await {
                    Ok(message) if message.terminal => {
                        return Some((Ok(to_event(&message)), Feed::Finished(None)));
                    }
                    Ok(message) => {
                        if last.is_some_and(|l| message.iteration <= l) {
                            continue;
                        }
                        last = Some(message.iteration);
                        return Some((Ok(to_event(&message)), Feed::Live { rx, last }));
                    }
                    Err(RecvError::Lagged(skipped)) => {
                        log::debug!("subscriber lagged by {skipped} events");
                    }
                    Err(RecvError::Closed) => return None,
                }
            },
        }
    })
}

async fn job_events(
    State(state): State<SharedState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let job = find_job(&state, &id)?;
    Ok(Sse::new(progress_stream(&job))
        .keep_alive(KeepAlive::default())
        .into_response())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct FilterResponse<'a> {
    filter: &'a FilterSpec,
    #[serde(flatten)]
    visible: VisibleSubgraph,
}

async fn get_filter(State(state): State<SharedState>) -> Result<Response, ApiError> {
    let session = state.session.read().unwrap();
    let visible = apply_filter(&state.graph, session.layout.as_ref(), &session.filter)?;
    Ok(json_utf8(&FilterResponse {
        filter: &session.filter,
        visible,
    }))
}

async fn set_filter(State(state): State<SharedState>, body: Bytes) -> Result<Response, ApiError> {
    let spec: FilterSpec = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request("invalid_filter", e.to_string()))?;
    let mut session = state.session.write().unwrap();
    let visible = apply_filter(&state.graph, session.layout.as_ref(), &spec)?;
    session.filter = spec;
    Ok(json_utf8(&FilterResponse {
        filter: &session.filter,
        visible,
    }))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Neighbor {
    pub node_id: String,
    pub edge_id: String,
    pub edge_kind: String,
    pub direction: &'static str,
}

async fn get_node(
    State(state): State<SharedState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let graph = &state.graph;
    let node = graph
        .node(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown node {id:?}")))?;
    let mut neighbors = Vec::new();
    for e in graph.edges() {
        if e.source == id {
            neighbors.push(Neighbor {
                node_id: e.target.clone(),
                edge_id: e.id.clone(),
                edge_kind: e.kind.clone(),
                direction: "outgoing",
            });
        }
        if e.target == id {
            neighbors.push(Neighbor {
                node_id: e.source.clone(),
                edge_id: e.id.clone(),
                edge_kind: e.kind.clone(),
                direction: "incoming",
            });
        }
    }
    let position = state
        .session
        .read()
        .unwrap()
        .layout
        .as_ref()
        .and_then(|l| l.get(&id));
    Ok(json_utf8(&json!({
        "id": node.id,
        "label": node.label,
        "uri": node.uri,
        "detailsUrl": node.details_url,
        "position": position,
        "neighbors": neighbors,
    })))
}

const INDEX_HTML: &str = r#"<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><title>tgforge</title></head>
<body>
<h1>tgforge</h1>
<p>No viewer assets are configured. The JSON API is available:</p>
<ul>
<li><a href="/api/graph">/api/graph</a></li>
<li><a href="/api/filter">/api/filter</a></li>
<li><a href="/api/layout">/api/layout</a></li>
</ul>
</body>
</html>
"#;

async fn index_page() -> Html<&'static str> {
    Html(INDEX_HTML)
}
