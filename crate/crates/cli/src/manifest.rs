use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use hmt_core::montecarlo::{CSV_COLUMNS, CSV_SCHEMA_VERSION};
use hmt_core::SimConfig;
use serde::Serialize;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Everything needed to reproduce one result CSV. Written before the run
/// (status `running`) and rewritten when it ends.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub manifest_schema_version: u32,
    pub csv_schema_version: u32,
    pub csv_columns: Vec<String>,
    pub command: String,
    /// Command-specific arguments that are not part of the config.
    pub args: serde_json::Value,
    /// Canonical `key = value` pairs; feeding them back via `--config`
    /// reproduces the run.
    pub config_pairs: Vec<(String, String)>,
    pub config: SimConfig,
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
    pub argv: Vec<String>,
    pub started_unix_s: f64,
    pub finished_unix_s: Option<f64>,
    pub status: String,
    pub error: Option<String>,
    pub outputs: Outputs,
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Outputs {
    pub csv: String,
    pub manifest: String,
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    pub fn start(
        command: &str,
        cfg: &SimConfig,
        args: serde_json::Value,
        csv: &Path,
        manifest: &Path,
        notes: Vec<String>,
    ) -> Self {
        Self {
            manifest_schema_version: MANIFEST_SCHEMA_VERSION,
            csv_schema_version: CSV_SCHEMA_VERSION,
            csv_columns: CSV_COLUMNS.iter().map(|s| s.to_string()).collect(),
            command: command.to_string(),
            args,
            config_pairs: cfg.to_pairs(),
            config: cfg.clone(),
            config_hash: cfg.config_hash(),
            seed: cfg.seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            argv: std::env::args().collect(),
            started_unix_s: now(),
            finished_unix_s: None,
            status: "running".to_string(),
            error: None,
            outputs: Outputs {
                csv: csv.display().to_string(),
                manifest: manifest.display().to_string(),
            },
            notes,
        }
    }

    pub fn finish(&mut self, status: &str, error: Option<String>) {
        self.status = status.to_string();
        self.error = error;
        self.finished_unix_s = Some(now());
    }

    pub fn write(&self, path: &Path) -> Result<(), String> {
        let text = serde_json::to_string_pretty(self).map_err(|e| e.to_string())?;
        std::fs::write(path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))
    }
}
