use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use graphlf::engine::Step;
use graphlf::systems::Registry;
use graphlf::tactics::{Tactic, DEFAULT_FUEL};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::auth::{authenticate, Users};
use crate::error::ApiError;
use crate::session::{now, Session, SessionStore, SharedSession};
use crate::view::{candidates_view, state_view, system_view, RuleCandidates, StateView};

pub struct AppState {
    pub registry: Registry,
    pub users: Option<Users>,
    pub sessions: SessionStore,
}

impl AppState {
    pub fn new(registry: Registry, users: Option<Users>, sessions: SessionStore) -> Self {
        AppState {
            registry,
            users,
            sessions,
        }
    }
}

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/v1/systems", get(systems))
        .route("/api/v1/sessions", post(create))
        .route("/api/v1/sessions/{id}", get(show))
        .route("/api/v1/sessions/{id}/apply", post(apply))
        .route("/api/v1/sessions/{id}/applicable", post(applicable))
        .route("/api/v1/sessions/{id}/tactic", post(tactic))
        .route("/api/v1/sessions/{id}/undo", post(undo))
        .route("/api/v1/sessions/{id}/export", get(export))
        .with_state(state)
}

#[derive(Debug, Deserialize)]
pub struct CreateRequest {
    pub system: String,
    pub goal: String,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CreateResponse {
    pub session_id: String,
    pub state: StateView,
}

#[derive(Debug, Deserialize)]
pub struct ApplyRequest {
    pub version: Option<u64>,
    #[serde(flatten)]
    pub step: Step,
}

#[derive(Debug, Default, Deserialize)]
pub struct ApplicableRequest {
    #[serde(default)]
    pub target: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct TacticRequest {
    pub version: Option<u64>,
    #[serde(default)]
    pub tactic: Option<String>,
    #[serde(default)]
    pub strategy: Option<String>,
    #[serde(default)]
    pub fuel: Option<u64>,
}

#[derive(Debug, Deserialize)]
pub struct UndoRequest {
    pub version: Option<u64>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TacticResponse {
    pub outcome: &'static str,
    pub trace: Vec<Step>,
    pub fuel_used: u64,
    pub state: StateView,
}

async fn systems(State(app): State<Shared>) -> Json<serde_json::Value> {
    let list: Vec<_> = app.registry.list().iter().map(system_view).collect();
    Json(json!({ "systems": list }))
}

async fn create(
    State(app): State<Shared>,
    headers: HeaderMap,
    Json(req): Json<CreateRequest>,
) -> Result<(StatusCode, Json<CreateResponse>), ApiError> {
    let user = authenticate(app.users.as_ref(), &headers)?;
    let system = app.registry.get(&req.system)?;
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Session::new(id.clone(), user, system, &req.goal)?;
    let shared = app.sessions.insert(session)?;
    let state = state_view(&shared.lock().expect("session lock"));
    Ok((StatusCode::CREATED, Json(CreateResponse { session_id: id, state })))
}

/// Looks up a session the caller owns and runs `f` on it off the async
/// runtime, holding the session lock.
async fn with_session<T, F>(app: Shared, headers: &HeaderMap, id: String, f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce(&AppState, &mut Session) -> Result<T, ApiError> + Send + 'static,
{
    let user = authenticate(app.users.as_ref(), headers)?;
    let shared: SharedSession = app
        .sessions
        .get(&id)
        .ok_or_else(|| ApiError::UnknownSession(id.clone()))?;
    tokio::task::spawn_blocking(move || {
        let mut session = shared.lock().expect("session lock");
        if session.owner != user {
            return Err(ApiError::Forbidden(id));
        }
        f(&app, &mut session)
    })
    .await
    .expect("session task panicked")
}

/// Commits a mutation: bumps the version and saves, or rolls the session
/// back to `len` steps if saving fails.
fn commit(app: &AppState, session: &mut Session, len: usize) -> Result<(), ApiError> {
    let (version, updated) = (session.version, session.updated_at);
    session.version += 1;
    session.updated_at = now();
    if let Err(e) = app.sessions.save(session) {
        session.truncate(len);
        session.version = version;
        session.updated_at = updated;
        return Err(e);
    }
    Ok(())
}

async fn show(
    State(app): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
) -> Result<Json<StateView>, ApiError> {
    with_session(app, &headers, id, |_, s| Ok(Json(state_view(s)))).await
}

async fn apply(
    State(app): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
    Json(req): Json<ApplyRequest>,
) -> Result<Json<StateView>, ApiError> {
    with_session(app, &headers, id, move |app, s| {
        s.check_version(req.version)?;
        let len = s.log.len();
        s.apply(&req.step)?;
        commit(app, s, len)?;
        Ok(Json(state_view(s)))
    })
    .await
}

async fn applicable(
    State(app): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
    Json(req): Json<ApplicableRequest>,
) -> Result<Json<Vec<RuleCandidates>>, ApiError> {
    with_session(app, &headers, id, move |_, s| {
        let cands = s.proof.applicable(req.target.as_deref())?;
        Ok(Json(candidates_view(s.proof.calculus(), &s.proof.rule_names(), cands)))
    })
    .await
}

async fn tactic(
    State(app): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
    Json(req): Json<TacticRequest>,
) -> Result<Json<TacticResponse>, ApiError> {
    with_session(app, &headers, id, move |app, s| {
        s.check_version(req.version)?;
        let t = match (&req.strategy, &req.tactic) {
            (Some(name), None) => s.system.strategy(name)?.clone(),
            (None, Some(text)) => match s.system.strategies.iter().find(|(n, _)| n == text) {
                Some((_, t)) => t.clone(),
                None => Tactic::parse(text)?,
            },
            _ => {
                return Err(ApiError::BadRequest(
                    "give exactly one of `tactic` and `strategy`".into(),
                ))
            }
        };
        let len = s.log.len();
        let r = s.run_tactic(&t, req.fuel.unwrap_or(DEFAULT_FUEL));
        let trace = match &r.outcome {
            graphlf::tactics::Outcome::Success { trace } => trace.clone(),
            _ => Vec::new(),
        };
        if !trace.is_empty() {
            commit(app, s, len)?;
        }
        Ok(Json(TacticResponse {
            outcome: r.outcome.name(),
            trace,
            fuel_used: r.fuel_used,
            state: state_view(s),
        }))
    })
    .await
}

async fn undo(
    State(app): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
    Json(req): Json<UndoRequest>,
) -> Result<Json<StateView>, ApiError> {
    with_session(app, &headers, id, move |app, s| {
        s.check_version(req.version)?;
        let backup = (s.proof.clone(), s.log.clone());
        s.undo()?;
        if let Err(e) = commit(app, s, usize::MAX) {
            (s.proof, s.log) = backup;
            return Err(e);
        }
        Ok(Json(state_view(s)))
    })
    .await
}

async fn export(State(app): State<Shared>, headers: HeaderMap, Path(id): Path<String>) -> Result<Response, ApiError> {
    with_session(app, &headers, id, |_, s| {
        let body = s.proof.export().to_json();
        Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
    })
    .await
}
