use std::collections::BTreeMap;
use std::path::Path;

use axum::http::{header, HeaderMap};

use crate::error::{ApiError, ServerError};

/// User used for every request when the server runs without a users file.
pub const LOCAL_USER: &str = "local";

/// Static bearer tokens, read from a JSON object mapping user ids to tokens.
#[derive(Debug, Clone, Default)]
pub struct Users {
    by_token: BTreeMap<String, String>,
}

impl Users {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let map: BTreeMap<String, String> = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let mut by_token = BTreeMap::new();
        for (user, token) in map {
            if token.is_empty() {
                return Err(format!("user {user} has an empty token"));
            }
            if let Some(other) = by_token.insert(token, user.clone()) {
                return Err(format!("users {other} and {user} share a token"));
            }
        }
        Ok(Users { by_token })
    }

    pub fn load(path: &Path) -> Result<Self, ServerError> {
        let text = std::fs::read_to_string(path).map_err(|e| ServerError::file(path, e))?;
        Users::from_json(&text).map_err(|e| ServerError::file(path, e))
    }

    pub fn user_for(&self, token: &str) -> Option<&str> {
        self.by_token.get(token).map(String::as_str)
    }
}

/// Resolves the requesting user. Without a users file every request is the
/// local user.
pub fn authenticate(users: Option<&Users>, headers: &HeaderMap) -> Result<String, ApiError> {
    let Some(users) = users else {
        return Ok(LOCAL_USER.to_string());
    };
    let token = headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .ok_or(ApiError::Unauthorized)?;
    users
        .user_for(token.trim())
        .map(str::to_string)
        .ok_or(ApiError::Unauthorized)
}
