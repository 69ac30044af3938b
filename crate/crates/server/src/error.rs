use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use graphlf::engine::EngineError;
use graphlf::syntax::SyntaxError;
use graphlf::systems::SystemError;
use serde_json::json;
use thiserror::Error;

/// Failure of a single request. Every variant leaves session state as it was.
#[derive(Debug, Error)]
pub enum ApiError {
    #[error("missing or unknown bearer token")]
    Unauthorized,
    #[error("session {0} belongs to another user")]
    Forbidden(String),
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("request was made against version {sent}, the session is at {current}")]
    VersionConflict { sent: u64, current: u64 },
    #[error("mutating requests must carry the session `version`")]
    MissingVersion,
    #[error("{0}")]
    BadRequest(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("could not save the session: {0}")]
    Storage(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::Unauthorized => StatusCode::UNAUTHORIZED,
            ApiError::Forbidden(_) => StatusCode::FORBIDDEN,
            ApiError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ApiError::VersionConflict { .. } => StatusCode::CONFLICT,
            ApiError::MissingVersion | ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::Engine(_) | ApiError::System(_) | ApiError::Syntax(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    /// Error name carried in response bodies. Engine and registry errors use
    /// the library's own names.
    pub fn name(&self) -> &'static str {
        match self {
            ApiError::Unauthorized => "Unauthorized",
            ApiError::Forbidden(_) => "Forbidden",
            ApiError::UnknownSession(_) => "UnknownSession",
            ApiError::VersionConflict { .. } => "VersionConflict",
            ApiError::MissingVersion => "MissingVersion",
            ApiError::BadRequest(_) => "BadRequest",
            ApiError::Engine(e) => e.name(),
            ApiError::System(e) => e.name(),
            ApiError::Syntax(_) => "SyntaxError",
            ApiError::Storage(_) => "StorageError",
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.name(), "message": self.to_string() });
        if let ApiError::VersionConflict { current, .. } = self {
            body["version"] = json!(current);
        }
        (self.status(), Json(body)).into_response()
    }
}

/// Startup and command-line failures.
#[derive(Debug, Error)]
pub enum ServerError {
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("session file {path} does not replay: {message}")]
    Replay { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ServerError {
    pub fn file(path: &std::path::Path, message: impl ToString) -> Self {
        ServerError::File {
            path: path.display().to_string(),
            message: message.to_string(),
        }
    }
}
