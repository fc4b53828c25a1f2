use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Record of one invocation: what was asked, what was produced, how long it took.
#[derive(Debug, Default, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub threads: usize,
    pub config: BTreeMap<String, String>,
    pub mesh_checksums: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub timings_seconds: BTreeMap<String, f64>,
    #[serde(skip)]
    clock: Option<Instant>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            threads: pseudovem::parallel::thread_count(),
            clock: Some(Instant::now()),
            ..Default::default()
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.to_string(), value.to_string());
    }

    /// Adds the time since the previous lap to `phase`.
    pub fn lap(&mut self, phase: &str) {
        let now = Instant::now();
        let dt = self.clock.map(|c| (now - c).as_secs_f64()).unwrap_or(0.0);
        *self.timings_seconds.entry(phase.to_string()).or_insert(0.0) += dt;
        self.clock = Some(now);
    }

    pub fn add_timing(&mut self, phase: &str, seconds: f64) {
        *self.timings_seconds.entry(phase.to_string()).or_insert(0.0) += seconds;
    }

    pub fn mesh(&mut self, name: &str, serialized: &str) {
        self.mesh_checksums.insert(name.to_string(), sha256_hex(serialized.as_bytes()));
    }

    /// Writes `contents` to `path` and records its checksum.
    pub fn write_output(&mut self, path: &Path, contents: &[u8]) -> std::io::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, contents)?;
        self.outputs.insert(path.display().to_string(), sha256_hex(contents));
        Ok(())
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let json = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(path, json + "\n")
    }
}
