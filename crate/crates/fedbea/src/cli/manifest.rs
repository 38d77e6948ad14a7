//! Run manifests: the resolved config snapshot written before any
//! computation. Everything except `started_at_unix` is reproducible, so two
//! manifests for the same run differ only in that field.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::cli::config::RunConfig;
use crate::error::Result;

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub artifact_version: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub started_at_unix: u64,
    pub outputs: Vec<String>,
    pub config: &'a RunConfig,
}

pub fn write_manifest(
    config: &RunConfig,
    command: &str,
    outputs: &[PathBuf],
    path: &Path,
) -> Result<()> {
    let manifest = RunManifest {
        artifact_version: env!("CARGO_PKG_VERSION"),
        command,
        seed: config.seed,
        started_at_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        config,
    };
    std::fs::write(path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}
