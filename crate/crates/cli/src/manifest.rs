use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize)]
pub struct InputHash {
    pub role: String,
    pub source: String,
    pub sha256: String,
    pub bytes: usize,
}

impl InputHash {
    pub fn new(role: &str, source: &str, bytes: &[u8]) -> Self {
        InputHash {
            role: role.into(),
            source: source.into(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        }
    }
}

/// Record of one command invocation. Everything except `timing` depends
/// only on the inputs and options.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub inputs: Vec<InputHash>,
    /// sha256 over the input hashes in order.
    pub inputs_sha256: String,
    pub options: Value,
    pub results: Value,
    pub outputs: Vec<String>,
    pub timing: Value,
}

impl Manifest {
    pub fn new(command: &str, inputs: Vec<InputHash>, options: Value) -> Self {
        let joined: String = inputs.iter().map(|i| format!("{}:{}\n", i.role, i.sha256)).collect();
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            inputs_sha256: sha256_hex(joined.as_bytes()),
            inputs,
            options,
            results: Value::Null,
            outputs: Vec::new(),
            timing: Value::Null,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

/// Output path relative to `root` when possible.
pub fn relative(root: &Path, path: &Path) -> String {
    path.strip_prefix(root).unwrap_or(path).to_string_lossy().replace('\\', "/")
}
