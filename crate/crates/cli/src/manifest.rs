//! Run manifests and file helpers shared by all commands.

use crate::error::{CliError, CliResult};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const OUT_DIR_ENV: &str = "QRNG_OUT_DIR";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `explicit` if given, else `default_name` inside `$QRNG_OUT_DIR` (or the
/// working directory).
pub fn resolve_out(explicit: Option<&Path>, default_name: &str) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_default()
            .join(default_name),
    }
}

/// `path` with `suffix` appended to its file name.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

pub fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn write_file(path: &Path, data: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, data).map_err(|e| CliError::io(path, e))
}

/// Wall-clock milliseconds, or `$SOURCE_DATE_EPOCH` seconds when set so that
/// manifests themselves can be reproduced byte for byte.
pub fn unix_ms() -> u64 {
    if let Some(secs) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse::<u64>().ok()) {
        return secs * 1000;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub role: String,
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(role: &str, path: &Path, data: &[u8]) -> Self {
        Self {
            role: role.to_string(),
            path: path.to_path_buf(),
            bytes: data.len() as u64,
            sha256: sha256_hex(data),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// The command's resolved arguments; enough to re-run it.
    pub args: serde_json::Value,
    pub seed: Option<u64>,
    /// Library configurations the run was built from.
    pub configs: serde_json::Value,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Command-specific results (fit, monitor counts, yields, ...).
    pub summary: serde_json::Value,
}

/// Collects outputs while a command runs and writes the manifest at the end.
pub struct Recorder {
    manifest: Manifest,
}

impl Recorder {
    pub fn new(command: &str, args: &impl Serialize, seed: Option<u64>) -> Self {
        Self {
            manifest: Manifest {
                tool: "qrng".to_string(),
                version: TOOL_VERSION.to_string(),
                command: command.to_string(),
                args: serde_json::to_value(args).expect("arguments serialize"),
                seed,
                configs: serde_json::Value::Null,
                started_unix_ms: unix_ms(),
                finished_unix_ms: 0,
                inputs: Vec::new(),
                outputs: Vec::new(),
                summary: serde_json::Value::Null,
            },
        }
    }

    pub fn configs(&mut self, configs: serde_json::Value) {
        self.manifest.configs = configs;
    }

    pub fn summary(&mut self, summary: serde_json::Value) {
        self.manifest.summary = summary;
    }

    pub fn input(&mut self, role: &str, path: &Path, data: &[u8]) {
        self.manifest.inputs.push(FileDigest::of(role, path, data));
    }

    pub fn output(&mut self, role: &str, path: &Path, data: &[u8]) -> CliResult<()> {
        write_file(path, data)?;
        self.manifest.outputs.push(FileDigest::of(role, path, data));
        Ok(())
    }

    /// Write the manifest to `path` and return it.
    pub fn finish(mut self, path: &Path) -> CliResult<Manifest> {
        self.manifest.finished_unix_ms = unix_ms();
        let mut json = serde_json::to_vec_pretty(&self.manifest).expect("manifest serializes");
        json.push(b'\n');
        write_file(path, &json)?;
        Ok(self.manifest)
    }
}

pub fn load_manifest(path: &Path) -> CliResult<Manifest> {
    let data = read_file(path)?;
    serde_json::from_slice(&data).map_err(|e| CliError::bad_input(path, e))
}
