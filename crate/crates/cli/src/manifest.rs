use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::{RunConfig, SeedSource};

/// Everything needed to re-run an experiment. Timestamps live here and
/// nowhere else, so the numeric outputs stay byte-identical across runs.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub tool_version: String,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub jobs: Option<usize>,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<String>,
    pub config: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig, seed_source: SeedSource, jobs: Option<usize>) -> Self {
        let now = chrono::Utc::now().to_rfc3339();
        Self {
            command: command.to_string(),
            config_hash: config.hash(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.noise.seed,
            seed_source,
            jobs,
            started_at: now.clone(),
            finished_at: now,
            outputs: Vec::new(),
            config: serde_json::to_value(config).expect("config serializes"),
        }
    }

    pub fn finish(&mut self) {
        self.finished_at = chrono::Utc::now().to_rfc3339();
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    }
}
