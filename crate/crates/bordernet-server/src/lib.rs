//! HTTP/JSON service wrapping the benchmark engine.
//!
//! Long work (training, the 100-cell occlusion grid) runs as background jobs
//! polled through `/api/jobs/{id}`; quick analysis (single evaluations, grid
//! diffs, occlusion previews, filter export, orientation maps) answers
//! inline. File outputs land in a server-side artifacts directory addressed
//! by bare names — clients upload or download through `/api/artifacts`.

mod jobs;
mod routes;
mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

pub use jobs::JobRegistry;
pub use store::DataStore;

/// Everything the service needs to run.
#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Directory holding the four MNIST IDX files (plain or .gz).
    pub data_dir: PathBuf,
    /// Where checkpoints, grids and other outputs are stored.
    pub artifacts_dir: PathBuf,
}

impl ServerConfig {
    pub fn new(data_dir: impl Into<PathBuf>, artifacts_dir: impl Into<PathBuf>) -> Self {
        ServerConfig {
            data_dir: data_dir.into(),
            artifacts_dir: artifacts_dir.into(),
        }
    }
}

pub struct AppState {
    pub config: ServerConfig,
    pub data: DataStore,
    pub jobs: JobRegistry,
}

pub type SharedState = Arc<AppState>;

impl AppState {
    pub fn new(config: ServerConfig) -> SharedState {
        let data = DataStore::new(config.data_dir.clone());
        Arc::new(AppState {
            config,
            data,
            jobs: JobRegistry::default(),
        })
    }
}

/// The service router; exposed for in-process tests and embedding.
pub fn router(state: SharedState) -> axum::Router {
    routes::router(state)
}

/// A service bound to a local address, ready to accept connections.
pub struct BoundServer {
    pub addr: SocketAddr,
    handle: tokio::task::JoinHandle<std::io::Result<()>>,
}

impl BoundServer {
    /// Run until the process exits (or the task is aborted).
    pub async fn join(self) -> std::io::Result<()> {
        self.handle.await.expect("server task panicked")
    }

    /// Stop accepting connections and drop in-flight work.
    pub fn abort(&self) {
        self.handle.abort();
    }
}

/// Bind `addr` (port 0 picks a free port) and serve in a background task.
pub async fn serve(addr: SocketAddr, config: ServerConfig) -> std::io::Result<BoundServer> {
    std::fs::create_dir_all(&config.artifacts_dir)?;
    let state = AppState::new(config);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let addr = listener.local_addr()?;
    let app = router(state);
    let handle = tokio::spawn(async move { axum::serve(listener, app).await });
    Ok(BoundServer { addr, handle })
}
