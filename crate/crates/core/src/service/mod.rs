//! Query and streaming interface over live analytics, curation state and
//! its persistence.

mod curation;
mod http;
mod state;
mod store;

use std::path::{Path, PathBuf};
use std::sync::{RwLock, RwLockReadGuard};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::{broadcast, watch};

pub use curation::{
    fixture_products, NewProduct, NewWatchTopic, Product, ProductFilter, TopicOrigin, Visibility, WatchTopic,
};
pub use http::{bind, router, serve, ApiError};
pub use state::{Command, CommandError, ServiceState, Update, UpdateEvent};
pub use store::{replay_recovered, Recovered, Store, StoreError, SNAPSHOT_FILE, TAIL_FILE};

use crate::enrichment::Enricher;
use crate::ingestion::{Sink, SinkError};
use crate::model::Message;
use crate::pipeline::{PipelineConfig, PipelineError};

pub const CONFIG_ENV: &str = "URBANSENSE_CONFIG";

fn default_listen() -> String {
    "127.0.0.1:8080".into()
}

fn default_snapshot_every() -> u64 {
    1000
}

fn default_stream_buffer() -> usize {
    1024
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub pipeline: PipelineConfig,
    pub listen: String,
    /// Commands between two snapshots.
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: u64,
    /// Stream events buffered per subscriber; a subscriber falling further
    /// behind is disconnected.
    #[serde(default = "default_stream_buffer")]
    pub stream_buffer: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            pipeline: PipelineConfig::default(),
            listen: default_listen(),
            snapshot_every: default_snapshot_every(),
            stream_buffer: default_stream_buffer(),
        }
    }
}

impl ServiceConfig {
    pub fn from_json(json: &str) -> Result<Self, ServiceError> {
        serde_json::from_str(json).map_err(|e| ServiceError::Config(e.to_string()))
    }

    /// Reads the file named by `URBANSENSE_CONFIG`, or the defaults.
    pub fn from_env() -> Result<Self, ServiceError> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) => {
                let text = crate::pipeline::read_text(Path::new(&path))?;
                Self::from_json(&text)
            }
            None => Ok(Self::default()),
        }
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Command(#[from] CommandError),
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("server: {0}")]
    Io(#[from] std::io::Error),
}

struct Inner {
    state: ServiceState,
    store: Option<Store>,
}

/// Single-writer service state shared by request handlers and replay.
pub struct Service {
    inner: RwLock<Inner>,
    enricher: Enricher,
    tx: broadcast::Sender<UpdateEvent>,
    closing: watch::Sender<bool>,
}

impl Service {
    /// In-memory service without persistence.
    pub fn new(cfg: &ServiceConfig) -> Result<Self, ServiceError> {
        let enricher = cfg.pipeline.enricher()?;
        let state = ServiceState::new(cfg.pipeline.engine.clone()).map_err(PipelineError::from)?;
        Ok(Self::assemble(state, None, enricher, cfg.stream_buffer))
    }

    /// Opens or recovers the store in `dir`. Returns recovery warnings.
    pub fn open(cfg: &ServiceConfig, dir: &Path) -> Result<(Self, Vec<String>), ServiceError> {
        let enricher = cfg.pipeline.enricher()?;
        let (store, rec) = Store::open(dir, cfg.snapshot_every)?;
        let base = match rec.snapshot {
            Some(s) => s,
            None => ServiceState::new(cfg.pipeline.engine.clone()).map_err(PipelineError::from)?,
        };
        let state = replay_recovered(base, rec.commands, &enricher)?;
        Ok((Self::assemble(state, Some(store), enricher, cfg.stream_buffer), rec.warnings))
    }

    fn assemble(state: ServiceState, store: Option<Store>, enricher: Enricher, buffer: usize) -> Self {
        let (tx, _) = broadcast::channel(buffer.max(1));
        let (closing, _) = watch::channel(false);
        Self { inner: RwLock::new(Inner { state, store }), enricher, tx, closing }
    }

    pub fn store_dir(&self) -> Option<PathBuf> {
        self.lock_read().store.as_ref().map(|s| s.dir().to_path_buf())
    }

    fn lock_read(&self) -> RwLockReadGuard<'_, Inner> {
        self.inner.read().unwrap_or_else(|e| e.into_inner())
    }

    pub fn read<R>(&self, f: impl FnOnce(&ServiceState) -> R) -> R {
        f(&self.lock_read().state)
    }

    /// Applies, persists and publishes one command.
    pub fn submit(&self, cmd: Command) -> Result<Vec<UpdateEvent>, ServiceError> {
        let mut inner = self.inner.write().unwrap_or_else(|e| e.into_inner());
        let recorded = inner.store.is_some().then(|| cmd.clone());
        let events = inner.state.apply(&self.enricher, cmd)?;
        let n = inner.state.applied;
        let Inner { state, store } = &mut *inner;
        if let (Some(store), Some(cmd)) = (store.as_mut(), recorded) {
            store.record(n, &cmd)?;
            if store.due() {
                store.snapshot(state)?;
            }
        }
        for e in &events {
            // no receivers is fine
            let _ = self.tx.send(e.clone());
        }
        Ok(events)
    }

    /// Writes a snapshot now, if persistent.
    pub fn checkpoint(&self) -> Result<(), ServiceError> {
        let mut inner = self.inner.write().unwrap_or_else(|e| e.into_inner());
        let Inner { state, store } = &mut *inner;
        if let Some(store) = store.as_mut() {
            store.snapshot(state)?;
        }
        Ok(())
    }

    /// Backlog after `since` and a receiver for everything newer, taken
    /// atomically with respect to writers.
    pub fn subscribe_since(&self, since: u64) -> (Vec<UpdateEvent>, broadcast::Receiver<UpdateEvent>) {
        let inner = self.lock_read();
        let rx = self.tx.subscribe();
        (inner.state.events_since(since).to_vec(), rx)
    }

    pub fn closing(&self) -> watch::Receiver<bool> {
        self.closing.subscribe()
    }

    /// Ends open streams so a graceful shutdown can complete.
    pub fn close_streams(&self) {
        self.closing.send_replace(true);
    }

    pub fn ingest(&self, message: Message) -> Result<Vec<UpdateEvent>, ServiceError> {
        self.submit(Command::Ingest { message })
    }
}

/// Replay target feeding a running service.
pub struct ServiceSink<'a>(pub &'a Service);

impl Sink for ServiceSink<'_> {
    fn accept(&mut self, msg: &Message) -> Result<(), SinkError> {
        self.0.ingest(msg.clone()).map(|_| ()).map_err(|e| SinkError(e.to_string()))
    }
}
