//! HTTP/JSON service around the discovery engine. Each uploaded log becomes
//! a session; discovery requests on a session are pure and may run
//! concurrently.

pub mod api;
pub mod config;
pub mod error;
pub mod params;
pub mod session;

use std::sync::Arc;

pub use api::{router, AppState};
pub use config::{ConfigError, ServiceConfig};
pub use error::{ApiError, FieldError};
pub use session::{LogSummary, Session, SessionStore};

/// Binds the configured address and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let addr = format!("{}:{}", config.host, config.port);
    let state = Arc::new(AppState::new(config)?);
    let listener = tokio::net::TcpListener::bind(&addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// [`serve`] on a fresh multi-threaded runtime.
pub fn serve_blocking(config: ServiceConfig) -> std::io::Result<()> {
    tokio::runtime::Builder::new_multi_thread().enable_all().build()?.block_on(serve(config))
}
