//! Run manifests and the file helpers that feed them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use glyphpress_core::config::{validate, RenderConfig};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigRef {
    pub path: String,
    pub fingerprint: String,
}

/// What ran, on which inputs, producing which outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub tool_version: &'static str,
    pub configs: Vec<ConfigRef>,
    pub seeds: BTreeMap<String, u64>,
    /// Remote endpoint URLs after environment fallbacks; tokens are never recorded.
    pub endpoints: BTreeMap<String, String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

fn display(path: &Path) -> String {
    fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf()).display().to_string()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command: Vec<String>) -> Self {
        RunManifest {
            command,
            tool_version: env!("CARGO_PKG_VERSION"),
            configs: Vec::new(),
            seeds: BTreeMap::new(),
            endpoints: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.seeds.insert(name.to_string(), seed);
    }

    /// Read an input file and record its digest.
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path).map_err(CliError::io(path))?;
        self.inputs.push(FileDigest { path: display(path), sha256: sha256_hex(&bytes) });
        Ok(bytes)
    }

    pub fn read_text(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = self.read(path)?;
        String::from_utf8(bytes).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
    }

    /// Load and validate a config file.
    pub fn config(&mut self, path: &Path) -> Result<RenderConfig, CliError> {
        let bytes = self.read(path)?;
        let config = RenderConfig::load(&bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let report = validate(&config);
        if !report.valid {
            return Err(CliError::InvalidConfig(report));
        }
        self.configs.push(ConfigRef { path: display(path), fingerprint: config.fingerprint() });
        Ok(config)
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(path, bytes).map_err(CliError::io(path))?;
        self.output(path, bytes);
        Ok(())
    }

    /// Record a file written elsewhere.
    pub fn output(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs.push(FileDigest { path: display(path), sha256: sha256_hex(bytes) });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

pub fn create_dir(path: &Path) -> Result<PathBuf, CliError> {
    fs::create_dir_all(path).map_err(CliError::io(path))?;
    Ok(path.to_path_buf())
}

pub fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes")
}

/// Write `text` and a newline to stdout; a closed pipe is an error, not a panic.
pub fn stdout(text: &str) -> Result<(), CliError> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").and_then(|_| out.flush()).map_err(|e| CliError::Failed(format!("stdout: {e}")))
}
