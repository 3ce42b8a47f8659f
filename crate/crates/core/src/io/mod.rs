//! Persistence: run configuration, field snapshots, CSV tables and run
//! manifests.

pub mod config;
pub mod manifest;
pub mod snapshot;
pub mod table;

pub use config::{normalize, RunConfig};

use std::path::Path;

use crate::error::Result;

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
