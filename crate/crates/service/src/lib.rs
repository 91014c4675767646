//! HTTP service around the virtual-patient engine: configuration, file
//! storage, the participant and admin API, and analytics endpoints.

pub mod analytics;
pub mod api;
pub mod app;
pub mod config;
pub mod store;

pub use api::router;
pub use app::{build_state, AppState, Overrides};
pub use config::ApiConfig;
pub use store::FileStore;
