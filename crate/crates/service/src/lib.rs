//! HTTP service hosting study sessions.
//!
//! Every accepted write is appended to a newline-delimited event log and
//! synced before it is acknowledged; on start the log is replayed to rebuild
//! all sessions.

pub mod config;
pub mod http;
pub mod store;

pub use config::ServiceConfig;
pub use http::router;
pub use store::{Ack, Command, Store, StoreError};
