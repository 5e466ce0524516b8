//! Hosts personalized browsing sessions over interaction programs: a site
//! and template catalog, sessions backed by an append-only log, and a JSON
//! HTTP API.

pub mod error;
pub mod http;
pub mod manager;
pub mod session;
pub mod store;

pub use error::ServiceError;
pub use manager::{Config, SessionManager};
pub use session::{Session, Status, Step};
