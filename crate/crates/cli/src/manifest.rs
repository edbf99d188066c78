//! Artifact writing and the per-run manifest.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

#[derive(Debug, Clone, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub replab_cli: &'static str,
    pub replab_core: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    /// SHA-256 of the canonical JSON of the effective inputs.
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub versions: Versions,
    pub inputs: Vec<InputFile>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub outputs: Vec<String>,
}

/// Writes artifacts into `--out` when given, otherwise prints the primary
/// one to stdout.
pub struct Artifacts {
    out: Option<PathBuf>,
    written: Vec<String>,
    started: u128,
    inputs: Vec<InputFile>,
}

impl Artifacts {
    pub fn new(out: Option<PathBuf>) -> Result<Self, String> {
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
        }
        Ok(Self { out, written: Vec::new(), started: unix_ms(), inputs: Vec::new() })
    }

    pub fn has_dir(&self) -> bool {
        self.out.is_some()
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(InputFile { path: path.display().to_string(), sha256: sha256_hex(bytes) });
    }

    /// Primary artifacts go to stdout without `--out`.
    pub fn primary(&mut self, name: &str, body: &str) -> Result<(), String> {
        match &self.out {
            Some(_) => self.file(name, body),
            None => {
                print!("{body}");
                if !body.ends_with('\n') {
                    println!();
                }
                Ok(())
            }
        }
    }

    /// Secondary artifacts are only written with `--out`.
    pub fn file(&mut self, name: &str, body: &str) -> Result<(), String> {
        let Some(dir) = &self.out else { return Ok(()) };
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn finish(self, command: &str, config: &serde_json::Value, seed: Option<u64>) -> Result<(), String> {
        let Some(dir) = &self.out else { return Ok(()) };
        let manifest = RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            config_sha256: sha256_hex(config.to_string().as_bytes()),
            seed,
            versions: Versions { replab_cli: env!("CARGO_PKG_VERSION"), replab_core: replab_core::VERSION },
            inputs: self.inputs,
            started_unix_ms: self.started,
            finished_unix_ms: unix_ms(),
            outputs: self.written,
        };
        let body = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
        let path = dir.join("manifest.json");
        std::fs::write(&path, body + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))
    }
}
