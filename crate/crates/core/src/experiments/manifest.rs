use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::write_atomic;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of_bytes(path: impl Into<PathBuf>, bytes: &[u8]) -> Self {
        FileDigest {
            path: path.into(),
            sha256: sha256_hex(bytes),
        }
    }

    pub fn of_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::of_bytes(path, &bytes))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Everything needed to replay a run. Contains no timestamps, so identical
/// inputs give an identical manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub tool_version: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: &impl Serialize, seed: u64) -> Result<Self> {
        Ok(RunManifest {
            subcommand: subcommand.to_string(),
            config: serde_json::to_value(config).map_err(|e| Error::Config(e.to_string()))?,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    /// `<out>/<subcommand>.manifest.json`
    pub fn path_in(&self, out: &Path) -> PathBuf {
        out.join(format!("{}.manifest.json", self.subcommand))
    }

    pub fn write(&self, out: &Path) -> Result<PathBuf> {
        let path = self.path_in(out);
        let mut text =
            serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    }
}
