//! HTTP/JSON front end for refinement sessions.
//!
//! Every session lives in memory behind its own lock and is mirrored to
//! `<state-dir>/<id>.json`. An event is acknowledged only after the file has
//! been replaced atomically, so a restart replays every acknowledged event.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dialogue_core::{parse_problem, Error, RefinementEvent, Session};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;
use tower_http::cors::{Any, CorsLayer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status: status.as_u16(),
            code: code.to_owned(),
            message: message.into(),
            field: None,
        }
    }

    fn with_field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }

    fn not_found(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "NOT_FOUND", format!("no session `{id}`"))
    }

    fn schema(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "SCHEMA", message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::UnknownId(id) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "UNKNOWN_ID", message).with_field(id),
            Error::NotAContraction { .. } => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "NOT_A_CONTRACTION", message),
            Error::ContradictoryInformation { .. } => ApiError::new(StatusCode::CONFLICT, "CONTRADICTORY", message),
            Error::StaleSequence { .. } => {
                ApiError::new(StatusCode::CONFLICT, "STALE_SEQUENCE", message).with_field("sequence")
            }
            Error::WrongVariant { .. } => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "WRONG_VARIANT", message),
            Error::EmptyLog => ApiError::new(StatusCode::CONFLICT, "EMPTY_LOG", message),
            Error::Schema(_)
            | Error::Dimension(_)
            | Error::InvalidBounds { .. }
            | Error::DuplicateId(_)
            | Error::InconsistentRelation { .. }
            | Error::SamePair(_) => ApiError::schema(message),
            Error::Io(_) | Error::Replay { .. } | Error::Invariant(_) | Error::NotEliminated(_) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", message)
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// All sessions plus the directory they are persisted to.
pub struct Store {
    dir: PathBuf,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl Store {
    /// Opens `dir`, creating it if needed, and replays every session file
    /// found there. Files that fail to replay are reported and skipped.
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<(Store, Vec<(PathBuf, Error)>)> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut sessions = HashMap::new();
        let mut skipped = Vec::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            match Session::load(&path) {
                Ok(s) => {
                    sessions.insert(s.id().to_owned(), Arc::new(Mutex::new(s)));
                }
                Err(e) => skipped.push((path, e)),
            }
        }
        Ok((
            Store {
                dir,
                sessions: RwLock::new(sessions),
            },
            skipped,
        ))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn path_for(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }

    fn get(&self, id: &str) -> ApiResult<Arc<Mutex<Session>>> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    fn insert(&self, session: Session) -> ApiResult<()> {
        session.save(&self.path_for(session.id()))?;
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(session.id().to_owned(), Arc::new(Mutex::new(session)));
        Ok(())
    }

    /// Runs `f` on the session under its lock. The session is persisted
    /// before returning; if `f` fails or persisting fails, the in-memory
    /// state is rolled back.
    fn mutate<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<T, Error>) -> ApiResult<T> {
        let cell = self.get(id)?;
        let mut session = cell.lock().expect("session poisoned");
        let snapshot = session.clone();
        let out = match f(&mut session) {
            Ok(out) => out,
            Err(e) => {
                *session = snapshot;
                return Err(e.into());
            }
        };
        if let Err(e) = session.save(&self.path_for(id)) {
            *session = snapshot;
            return Err(e.into());
        }
        Ok(out)
    }

    fn read<T>(&self, id: &str, f: impl FnOnce(&Session) -> T) -> ApiResult<T> {
        let cell = self.get(id)?;
        let session = cell.lock().expect("session poisoned");
        Ok(f(&session))
    }
}

#[derive(Debug, Clone, Default)]
pub struct Config {
    /// Allowed CORS origin; any origin when unset.
    pub cors_origin: Option<String>,
}

pub fn router(store: Arc<Store>, config: &Config) -> Router {
    let cors = match config.cors_origin.as_deref().and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(origin) => CorsLayer::new().allow_origin(origin),
        None => CorsLayer::new().allow_origin(Any),
    }
    .allow_methods(Any)
    .allow_headers(Any);

    Router::new()
        .route("/healthz", get(healthz))
        .route("/api/v1/sessions", post(create_session))
        .route("/api/v1/sessions/{id}", get(get_session))
        .route("/api/v1/sessions/{id}/events", post(post_event))
        .route("/api/v1/sessions/{id}/pareto", get(get_pareto))
        .route("/api/v1/sessions/{id}/suggestions", get(get_suggestions))
        .route("/api/v1/sessions/{id}/history", get(get_history))
        .route("/api/v1/sessions/{id}/undo", post(post_undo))
        .layer(cors)
        .with_state(store)
}

/// Serves until ctrl-c or SIGTERM.
pub async fn serve(listener: TcpListener, store: Arc<Store>, config: &Config) -> std::io::Result<()> {
    axum::serve(listener, router(store, config))
        .with_graceful_shutdown(shutdown_signal())
        .await
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}

async fn healthz() -> Json<serde_json::Value> {
    Json(json!({"status": "ok"}))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Created {
    pub session_id: String,
    pub pareto: Vec<String>,
    pub suggestions: Vec<dialogue_core::Suggestion>,
}

const DEFAULT_SUGGESTIONS: usize = 5;

async fn create_session(State(store): State<Arc<Store>>, body: Bytes) -> ApiResult<(StatusCode, Json<Created>)> {
    let mut value: serde_json::Value =
        serde_json::from_slice(&body).map_err(|e| ApiError::schema(e.to_string()))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| ApiError::schema("request body must be a JSON object"))?;
    let baseline: Option<Vec<String>> = match obj.remove("baseline") {
        None | Some(serde_json::Value::Null) => None,
        Some(b) => Some(serde_json::from_value(b).map_err(|e| ApiError::schema(e.to_string()).with_field("baseline"))?),
    };
    let problem = parse_problem(value.to_string().as_bytes())?;
    let session = Session::create(uuid::Uuid::new_v4().to_string(), problem, baseline.as_deref())?;
    let created = Created {
        session_id: session.id().to_owned(),
        pareto: session.pareto_report().pareto,
        suggestions: session.suggestions(DEFAULT_SUGGESTIONS),
    };
    store.insert(session)?;
    Ok((StatusCode::CREATED, Json(created)))
}

async fn get_session(State(store): State<Arc<Store>>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    store.read(&id, |s| Json(s.snapshot()).into_response())
}

async fn post_event(
    State(store): State<Arc<Store>>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> ApiResult<Response> {
    // Look the session up first so an unknown id is a 404 even with a bad body.
    store.get(&id)?;
    let mut event: RefinementEvent = serde_json::from_slice(&body).map_err(|e| ApiError::schema(e.to_string()))?;
    event.timestamp.get_or_insert_with(chrono::Utc::now);
    let delta = store.mutate(&id, |s| s.apply_event(event))?;
    Ok(Json(delta).into_response())
}

async fn get_pareto(State(store): State<Arc<Store>>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    store.read(&id, |s| Json(s.pareto_report()).into_response())
}

#[derive(Debug, Deserialize)]
struct Limit {
    limit: Option<usize>,
}

async fn get_suggestions(
    State(store): State<Arc<Store>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<Limit>,
) -> ApiResult<Response> {
    let k = q.limit.unwrap_or(DEFAULT_SUGGESTIONS);
    store.read(&id, |s| Json(s.suggestions(k)).into_response())
}

async fn get_history(State(store): State<Arc<Store>>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    store.read(&id, |s| Json(s.pareto_history()).into_response())
}

async fn post_undo(State(store): State<Arc<Store>>, UrlPath(id): UrlPath<String>) -> ApiResult<Response> {
    let (pareto, sequence) = store.mutate(&id, |s| {
        s.undo()?;
        Ok((s.pareto_report().pareto, s.last_sequence()))
    })?;
    Ok(Json(json!({"pareto": pareto, "sequence": sequence})).into_response())
}
