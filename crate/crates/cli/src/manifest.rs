//! Run manifests: the configuration, a checksum for every file the run
//! wrote, and the list of failed units. Re-running the embedded
//! configuration must reproduce every checksum.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileEntry {
    /// path relative to the manifest's directory
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub config_sha256: String,
    /// full configuration text, so `repro` is self-contained
    pub config_toml: String,
    pub files: Vec<FileEntry>,
    pub failed: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex_encode(&hasher.finalize())
}

fn hex_encode(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    pub fn new(config_toml: &str) -> Manifest {
        Manifest {
            tool: format!("abcring {}", env!("CARGO_PKG_VERSION")),
            config_sha256: sha256_hex(config_toml.as_bytes()),
            config_toml: config_toml.to_string(),
            files: Vec::new(),
            failed: Vec::new(),
        }
    }

    pub fn add_file(&mut self, root: &Path, rel: &str) -> Result<()> {
        let full = root.join(rel);
        let bytes = std::fs::read(&full)
            .with_context(|| format!("hashing {}", full.display()))?;
        self.files.push(FileEntry {
            path: rel.to_string(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn write(&self, root: &Path) -> Result<PathBuf> {
        let path = root.join("manifest.json");
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, json)?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Re-hash every listed file under `root`; returns mismatches.
    pub fn verify(&self, root: &Path) -> Vec<String> {
        let mut bad = Vec::new();
        for entry in &self.files {
            match std::fs::read(root.join(&entry.path)) {
                Err(e) => bad.push(format!("{}: {e}", entry.path)),
                Ok(bytes) => {
                    let h = sha256_hex(&bytes);
                    if h != entry.sha256 {
                        bad.push(format!(
                            "{}: checksum {} != recorded {}",
                            entry.path, h, entry.sha256
                        ));
                    }
                }
            }
        }
        bad
    }
}
