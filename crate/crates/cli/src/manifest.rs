//! Run manifests: every command writes one next to its outputs with enough
//! information to reproduce the run exactly.

use std::path::Path;
use std::time::Instant;

use banditsim_core::Result;
use serde::Serialize;

#[derive(Serialize)]
pub struct RunManifest {
    pub artifact_version: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Resolved configuration (or input description) the run used.
    pub config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policies: Option<Vec<String>>,
    /// File names written next to this manifest.
    pub outputs: Vec<String>,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            artifact_version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed: None,
            config,
            policies: None,
            outputs: Vec::new(),
            duration_seconds: 0.0,
        }
    }

    /// Stamp the wall-clock duration and write the manifest.
    pub fn finish(mut self, started: Instant, path: &Path) -> Result<()> {
        self.duration_seconds = started.elapsed().as_secs_f64();
        let text = serde_json::to_string_pretty(&self).expect("manifest types always serialize");
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}
