//! Output directories that checksum every file they write, and the JSON
//! manifest written last.

use crate::config::RunConfig;
use hartree::{HartreeError, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub config: RunConfig,
    /// Hash of the serialized config.
    pub config_hash: String,
    pub derived: BTreeMap<String, f64>,
    pub files: Vec<FileEntry>,
    pub wall_clock_s: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn config_hash(cfg: &RunConfig) -> String {
    sha256_hex(cfg.to_text().as_bytes())[..16].to_string()
}

pub struct OutputDir {
    dir: PathBuf,
    files: Vec<FileEntry>,
    derived: BTreeMap<String, f64>,
    start: Instant,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new(), derived: BTreeMap::new(), start: Instant::now() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        if name == MANIFEST_NAME || name.contains('/') {
            return Err(HartreeError::ConfigInvalid(format!("output name '{name}'")));
        }
        let p = self.dir.join(name);
        std::fs::write(&p, bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let s = serde_json::to_string_pretty(value).map_err(|e| HartreeError::ConfigInvalid(e.to_string()))?;
        self.write(name, s.as_bytes())
    }

    /// Record a derived constant for the manifest.
    pub fn derive(&mut self, name: &str, value: f64) {
        self.derived.insert(name.to_string(), value);
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    /// Write `manifest.json` and return it.
    pub fn finish(self, subcommand: &str, cfg: &RunConfig) -> Result<RunManifest> {
        let m = RunManifest {
            subcommand: subcommand.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.clone(),
            config_hash: config_hash(cfg),
            derived: self.derived,
            files: self.files,
            wall_clock_s: self.start.elapsed().as_secs_f64(),
        };
        let s = serde_json::to_string_pretty(&m).map_err(|e| HartreeError::ConfigInvalid(e.to_string()))?;
        std::fs::write(self.dir.join(MANIFEST_NAME), s)?;
        Ok(m)
    }
}

/// Recompute every checksum listed in a manifest; returns the mismatching paths.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(dir.join(MANIFEST_NAME))?;
    let m: RunManifest = serde_json::from_str(&text).map_err(|e| HartreeError::ConfigInvalid(e.to_string()))?;
    let mut bad = Vec::new();
    for f in &m.files {
        match std::fs::read(dir.join(&f.path)) {
            Ok(b) if sha256_hex(&b) == f.sha256 => {}
            _ => bad.push(f.path.clone()),
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
