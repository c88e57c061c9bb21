//! Output bundle and its manifest.
//!
//! Files are assembled in memory, then written together with
//! `manifest.json`, which lists each file with a git-style content hash
//! (SHA-256 over `"blob <len>\0"` followed by the bytes), the resolved
//! configuration, the command parameters and full-precision results. The
//! manifest carries no timestamps or host details, so identical inputs give
//! identical bytes.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::table::Table;

pub const MANIFEST: &str = "manifest.json";

/// Hex SHA-256 of the git blob encoding of `bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: RunConfig,
    pub parameters: Value,
    pub files: Vec<FileEntry>,
    pub results: Value,
}

/// Files produced by one command.
#[derive(Debug, Default)]
pub struct Bundle {
    files: Vec<(String, Vec<u8>)>,
}

impl Bundle {
    pub fn add_csv(&mut self, name: &str, table: &Table) {
        self.files.push((name.to_string(), table.to_csv()));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        self.files.push((name.to_string(), json_bytes(value)));
    }

    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|f| f.0 == name).map(|f| f.1.as_slice())
    }

    pub fn entries(&self) -> Vec<FileEntry> {
        self.files
            .iter()
            .map(|(name, b)| FileEntry { name: name.clone(), bytes: b.len(), sha256: content_hash(b) })
            .collect()
    }

    /// Write every file and the manifest into `dir`; returns the written
    /// paths, manifest last.
    pub fn write(&self, dir: &Path, manifest: &Manifest) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut written = Vec::with_capacity(self.files.len() + 1);
        for (name, bytes) in self.files.iter().chain([&(MANIFEST.to_string(), json_bytes(manifest))]) {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serialisable value");
    out.push(b'\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_matches_git_blob_layout() {
        // git hash-object --object-format=sha256 on an empty file
        assert_eq!(
            content_hash(b""),
            "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
        assert_ne!(content_hash(b"a"), content_hash(b"b"));
    }
}
