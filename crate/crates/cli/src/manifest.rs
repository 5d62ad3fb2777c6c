use std::path::{Path, PathBuf};

use intentseq_core::training::write_atomic;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub seeds: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub tool_version: String,
    pub wall_clock_secs: f64,
}

/// `<artifact>.manifest.json`, or `<dir>/run.manifest.json` for a directory.
pub fn manifest_path(artifact: &Path) -> PathBuf {
    if artifact.is_dir() {
        return artifact.join("run.manifest.json");
    }
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}

impl RunManifest {
    pub fn write_next_to(&self, artifact: &Path) -> intentseq_core::Result<PathBuf> {
        let path = manifest_path(artifact);
        let mut json = serde_json::to_vec_pretty(self).expect("manifest serializes");
        json.push(b'\n');
        write_atomic(&path, &json)?;
        Ok(path)
    }
}
