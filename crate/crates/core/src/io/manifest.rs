//! Run manifest: config hash, version, timing and output checksums.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub code_version: String,
    pub config_sha256: String,
    /// Canonical config with defaults filled in.
    pub config: String,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
    pub threads: usize,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    pub fn new(subcommand: &str, config: &str, threads: usize, started: f64) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: sha256_hex(config.as_bytes()),
            config: config.to_string(),
            started,
            finished: started,
            threads,
            files: Vec::new(),
        }
    }

    /// Hashes the named files under `dir` and writes the manifest there.
    pub fn finish(mut self, dir: &Path, files: &[PathBuf]) -> Result<Self> {
        let mut entries = Vec::new();
        for rel in files {
            let bytes = std::fs::read(dir.join(rel))?;
            entries.push(FileEntry {
                path: rel.display().to_string(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(&bytes),
            });
        }
        entries.sort_by(|a, b| a.path.cmp(&b.path));
        self.files = entries;
        self.finished = unix_now();
        super::table::write_json(&self, &dir.join(MANIFEST_NAME))?;
        Ok(self)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_NAME))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Checks every listed file against its recorded checksum.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for f in &self.files {
            let bytes = std::fs::read(dir.join(&f.path))?;
            if sha256_hex(&bytes) != f.sha256 {
                return Err(Error::Snapshot(format!("checksum mismatch for {}", f.path)));
            }
        }
        Ok(())
    }
}
