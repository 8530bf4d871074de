//! Run manifest: the resolved configuration, seeds, and artifact paths,
//! written before any result so a run is reproducible even if interrupted,
//! then finalized with wall-clock timings.

use anyhow::{Context, Result};
use occlusion_core::RunConfig;
use serde::Serialize;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seeds: Vec<u64>,
    pub artifacts: Vec<String>,
    pub config: RunConfig,
    pub started_unix_ms: u128,
    pub finished_unix_ms: Option<u128>,
    pub wall_ms: Option<u128>,
    #[serde(skip)]
    started: Instant,
}

fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

impl RunManifest {
    pub fn new(
        command: &'static str,
        config: RunConfig,
        seeds: Vec<u64>,
        artifacts: Vec<String>,
    ) -> Self {
        Self {
            schema: "manifest/1",
            tool: "occlusim",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seeds,
            artifacts,
            config,
            started_unix_ms: unix_ms(),
            finished_unix_ms: None,
            wall_ms: None,
            started: Instant::now(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)
            .with_context(|| format!("writing manifest {}", path.display()))
    }

    /// Rewrite with timings once all artifacts are on disk.
    pub fn finish(&mut self, path: &Path) -> Result<()> {
        self.finished_unix_ms = Some(unix_ms());
        self.wall_ms = Some(self.started.elapsed().as_millis());
        self.write(path)
    }
}
