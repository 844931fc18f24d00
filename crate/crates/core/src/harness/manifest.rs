//! `manifest.json`: what produced an output directory, and a SHA-256 of every
//! file in it so later stages can detect tampering or truncation.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub software: String,
    pub version: String,
    /// The resolved configuration, as TOML text.
    pub config: String,
    pub seed: String,
    #[serde(rename = "Y_sweep")]
    pub y_sweep: Vec<u32>,
    pub notes: Vec<String>,
    /// Paths relative to the output directory, `/`-separated.
    pub files: BTreeMap<String, FileEntry>,
}

pub fn hash_file(path: &Path) -> Result<FileEntry> {
    let file = File::open(path).map_err(|e| Error::corrupt(path, e))?;
    let mut reader = BufReader::new(file);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    let mut bytes = 0u64;
    loop {
        let k = reader.read(&mut buf).map_err(|e| Error::corrupt(path, e))?;
        if k == 0 {
            break;
        }
        hasher.update(&buf[..k]);
        bytes += k as u64;
    }
    Ok(FileEntry {
        sha256: hex::encode(hasher.finalize()),
        bytes,
    })
}

fn relative_key(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

impl Manifest {
    pub fn new(config: String, seed: u64, y_sweep: Vec<u32>) -> Self {
        Manifest {
            software: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            seed: seed.to_string(),
            y_sweep,
            notes: Vec::new(),
            files: BTreeMap::new(),
        }
    }

    pub fn path(root: &Path) -> PathBuf {
        root.join(MANIFEST_FILE)
    }

    pub fn load(root: &Path) -> Result<Self> {
        let path = Self::path(root);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::corrupt(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::corrupt(&path, e))
    }

    /// Hashes `path` (inside `root`) and records it.
    pub fn add_file(&mut self, root: &Path, path: &Path) -> Result<()> {
        let entry = hash_file(path)?;
        self.files.insert(relative_key(root, path), entry);
        Ok(())
    }

    pub fn write(&self, root: &Path) -> Result<()> {
        let path = Self::path(root);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| Error::output(&path, e))
    }

    /// Re-hashes every listed file; any mismatch or missing file is an error.
    pub fn verify(&self, root: &Path) -> Result<()> {
        for (key, expected) in &self.files {
            let path = root.join(key);
            let actual = hash_file(&path)?;
            if &actual != expected {
                return Err(Error::corrupt(
                    &path,
                    format!(
                        "checksum mismatch: manifest has {} ({} bytes), file has {} ({} bytes)",
                        expected.sha256, expected.bytes, actual.sha256, actual.bytes
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Verifies `path` alone against its manifest entry, if it has one.
    pub fn verify_file(&self, root: &Path, path: &Path) -> Result<()> {
        if let Some(expected) = self.files.get(&relative_key(root, path)) {
            let actual = hash_file(path)?;
            if &actual != expected {
                return Err(Error::corrupt(path, "checksum does not match manifest"));
            }
        }
        Ok(())
    }
}
