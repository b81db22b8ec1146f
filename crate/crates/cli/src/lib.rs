//! HTTP API and batch tooling on top of `eipe-core`.

pub mod api;
pub mod batch;
pub mod config;
pub mod setup;

pub use api::{router, serve, serve_engine, AppState, ServiceHandle};
pub use batch::{grade_batch, BatchSummary, PromptRow};
pub use config::{ApiConfig, BackendConfig, LimitOverrides};
