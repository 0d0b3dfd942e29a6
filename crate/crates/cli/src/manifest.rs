//! Run manifests: enough to rerun a command and check its outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> CliResult<Self> {
        let bytes = fs::read(path).map_err(CliError::io(path))?;
        Ok(Self { path: path.to_path_buf(), sha256: hex::encode(Sha256::digest(&bytes)) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Full argument list after the program name, as given.
    pub args: Vec<String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub config_digest: Option<String>,
    pub seed: Option<u64>,
    pub version: String,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).map_err(CliError::io(path))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Inputs whose current digest differs from the recorded one.
    pub fn changed_inputs(&self) -> CliResult<Vec<PathBuf>> {
        changed(&self.inputs)
    }

    /// Outputs whose current digest differs from the recorded one.
    pub fn changed_outputs(&self) -> CliResult<Vec<PathBuf>> {
        changed(&self.outputs)
    }
}

fn changed(files: &[FileDigest]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for f in files {
        if FileDigest::of(&f.path)?.sha256 != f.sha256 {
            out.push(f.path.clone());
        }
    }
    Ok(out)
}
