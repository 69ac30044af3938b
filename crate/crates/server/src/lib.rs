//! HTTP proof sessions over the graphlf engine, plus the pieces of the
//! command-line front end that are worth testing without a process.

pub mod api;
pub mod auth;
pub mod cli;
pub mod error;
pub mod session;
pub mod view;

pub use api::{router, AppState};
pub use auth::Users;
pub use error::{ApiError, ServerError};
