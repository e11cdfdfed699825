//! Atomic file output, hashing and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub kind: String,
    pub config_sha256: String,
    pub seeds: Vec<u64>,
    pub version: String,
    pub files: Vec<ManifestEntry>,
}

/// Collects output files of one run and records their hashes.
pub struct OutputSet {
    dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl OutputSet {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        OutputSet { dir: dir.into(), entries: Vec::new() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.entries.push(ManifestEntry { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    /// Writes `manifest.json` and returns it.
    pub fn finish(self, kind: &str, config_bytes: &[u8], seeds: Vec<u64>) -> Result<Manifest> {
        let m = Manifest {
            kind: kind.to_string(),
            config_sha256: sha256_hex(config_bytes),
            seeds,
            version: env!("CARGO_PKG_VERSION").to_string(),
            files: self.entries,
        };
        let mut s = serde_json::to_string_pretty(&m)?;
        s.push('\n');
        write_atomic(&self.dir.join("manifest.json"), s.as_bytes())?;
        Ok(m)
    }
}
