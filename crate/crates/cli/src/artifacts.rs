//! Run-directory writer. Every file goes through [`Artifacts`], which records
//! its SHA-256 for the manifest; the manifest itself is written last.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::csv_io::write_bytes;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub master_seed: u64,
    /// Every derived seed, keyed by `rep-NNN/<stream>` and the like.
    pub seeds: BTreeMap<String, u64>,
    pub files: Vec<FileEntry>,
    /// `"ok"` or `"error"`.
    pub status: String,
}

impl Manifest {
    pub fn read(dir: &Path) -> std::io::Result<Manifest> {
        let text = std::fs::read_to_string(dir.join(MANIFEST))?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }

    /// Files whose current content no longer matches the recorded hash.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| std::fs::read(dir.join(&f.path)).map_or(true, |bytes| sha256_hex(&bytes) != f.sha256))
            .map(|f| f.path.clone())
            .collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct Artifacts {
    root: PathBuf,
    files: BTreeMap<String, FileEntry>,
    seeds: BTreeMap<String, u64>,
}

impl Artifacts {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Artifacts {
            root: root.into(),
            files: BTreeMap::new(),
            seeds: BTreeMap::new(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn seed(&mut self, key: impl Into<String>, seed: u64) -> u64 {
        self.seeds.insert(key.into(), seed);
        seed
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> std::io::Result<()> {
        write_bytes(&self.root.join(rel), bytes)?;
        self.files.insert(
            rel.to_string(),
            FileEntry {
                path: rel.to_string(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len() as u64,
            },
        );
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    pub fn finish(self, command: &str, master_seed: u64, ok: bool) -> std::io::Result<Manifest> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            master_seed,
            seeds: self.seeds,
            files: self.files.into_values().collect(),
            status: if ok { "ok" } else { "error" }.to_string(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        text.push('\n');
        write_bytes(&self.root.join(MANIFEST), text.as_bytes())?;
        Ok(manifest)
    }
}
