//! Local HTTP API over the chainforge core, for the chain designer UI.
//!
//! All endpoints take and return JSON. Failures come back as `422` with an
//! [`ApiError`] body (`404` for unknown job ids). Disorder runs with more than
//! [`ServiceConfig::sync_limit`] samples run as background jobs: poll
//! `GET /api/jobs/{id}`, follow `GET /api/jobs/{id}/events` (server-sent
//! events) or cancel with `DELETE /api/jobs/{id}`.

mod api;
mod error;
mod jobs;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::http::{header, HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

pub use api::{
    ChainRequest, DisorderRequest, EigensystemResponse, EvolveRequest, JobAccepted, ProgressEvent,
    SolveRequest, SolveResponse, SpectrumRequest, Trace,
};
pub use error::{ApiError, ErrorCode};
pub use jobs::{JobState, JobStatus};

/// Environment variable capping the worker count of disorder runs.
pub const THREADS_ENV: &str = "CHAINFORGE_THREADS";
pub const DEFAULT_SYNC_LIMIT: usize = 1000;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub threads: Option<usize>,
    /// Largest disorder run answered synchronously.
    pub sync_limit: usize,
    /// Directory with the built UI, served at `/`.
    pub static_dir: Option<PathBuf>,
    pub progress_interval: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            threads: None,
            sync_limit: DEFAULT_SYNC_LIMIT,
            static_dir: None,
            progress_interval: Duration::from_millis(100),
        }
    }
}

impl ServiceConfig {
    /// Defaults, with the worker cap taken from `CHAINFORGE_THREADS` if set.
    pub fn from_env() -> Self {
        ServiceConfig {
            threads: threads_from_env(),
            ..Default::default()
        }
    }
}

/// Parses `CHAINFORGE_THREADS`; unset, empty, zero or garbage means no cap.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
}

struct AppState {
    config: ServiceConfig,
    jobs: jobs::JobTable,
}

fn is_local_origin(origin: &HeaderValue) -> bool {
    let Ok(origin) = origin.to_str() else {
        return false;
    };
    let Some(rest) = origin
        .strip_prefix("http://")
        .or_else(|| origin.strip_prefix("https://"))
    else {
        return false;
    };
    let host = if rest.starts_with('[') {
        rest.split_inclusive(']').next().unwrap_or(rest)
    } else {
        rest.split(':').next().unwrap_or(rest)
    };
    matches!(host, "localhost" | "127.0.0.1" | "[::1]")
}

fn cors() -> CorsLayer {
    CorsLayer::new()
        .allow_origin(AllowOrigin::predicate(|origin, _| is_local_origin(origin)))
        .allow_methods([Method::GET, Method::POST, Method::DELETE])
        .allow_headers([header::CONTENT_TYPE])
}

pub fn router(config: ServiceConfig) -> Router {
    let static_dir = config.static_dir.clone();
    let state = Arc::new(AppState {
        config,
        jobs: jobs::JobTable::default(),
    });
    let api = Router::new()
        .route("/api/spectrum", post(api::spectrum))
        .route("/api/solve", post(api::solve_chain))
        .route("/api/evolve", post(api::evolve_chain))
        .route("/api/eigensystem", post(api::eigensystem))
        .route("/api/effective", post(api::effective))
        .route("/api/disorder", post(api::disorder))
        .route(
            "/api/jobs/{id}",
            get(api::job_status).delete(api::cancel_job),
        )
        .route("/api/jobs/{id}/events", get(api::job_events))
        .route("/api/presets", get(api::presets))
        .with_state(state);
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.layer(cors())
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(config: ServiceConfig, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!(
        "chainforge service listening on http://{}",
        listener.local_addr()?
    );
    axum::serve(listener, router(config)).await
}

/// [`serve`] on a fresh multi-threaded runtime.
pub fn serve_blocking(config: ServiceConfig, addr: SocketAddr) -> std::io::Result<()> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?
        .block_on(serve(config, addr))
}
