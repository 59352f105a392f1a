//! HTTP JSON service: listing, search, view payloads, export, benchmarking,
//! classification and expert-resolution submission.

pub mod cache;
pub mod error;
pub mod routes;
pub mod state;
pub mod views;

use std::net::SocketAddr;
use std::sync::Arc;

use metamp_core::config::Config;
use metamp_core::store::EntryStore;

pub use error::{ApiError, ErrorBody};
pub use routes::{router, Health, ResolutionAck};
pub use state::{AppState, TrainingSummary};
pub use routes::ModelInfo;

pub fn app(store: Arc<dyn EntryStore>, config: Config) -> axum::Router {
    router(Arc::new(AppState::new(store, config)))
}

/// Binds `config.host:config.port` (port 0 picks a free one) and returns
/// the bound address with the server future.
pub async fn bind(
    store: Arc<dyn EntryStore>,
    config: Config,
) -> std::io::Result<(SocketAddr, impl std::future::Future<Output = std::io::Result<()>>)> {
    let listener = tokio::net::TcpListener::bind((config.host.as_str(), config.port)).await?;
    let addr = listener.local_addr()?;
    let app = app(store, config);
    Ok((addr, async move { axum::serve(listener, app).await }))
}

/// Serves until ctrl-c.
pub async fn serve(store: Arc<dyn EntryStore>, config: Config) -> std::io::Result<()> {
    let (addr, server) = bind(store, config).await?;
    tracing::info!("listening on http://{addr}");
    tokio::select! {
        r = server => r,
        _ = tokio::signal::ctrl_c() => Ok(()),
    }
}
