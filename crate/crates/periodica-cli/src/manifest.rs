//! Run manifest: config echo, stage timings, verdicts, warnings, and a
//! checksum for every emitted file.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub name: String,
    pub millis: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub config: serde_json::Value,
    pub stages: Vec<StageTiming>,
    pub significant_components: Vec<String>,
    pub warnings: Vec<String>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn new(config: serde_json::Value) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            stages: Vec::new(),
            significant_components: Vec::new(),
            warnings: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn record_stage(&mut self, name: &str, millis: u64) {
        self.stages.push(StageTiming {
            name: name.to_string(),
            millis,
        });
    }

    pub fn record_files(&mut self, base: &Path, files: &[PathBuf]) -> CliResult<()> {
        for f in files {
            let bytes = std::fs::read(f)
                .map_err(|e| CliError::Data(format!("cannot hash {}: {e}", f.display())))?;
            let digest = Sha256::digest(&bytes);
            let rel = f.strip_prefix(base).unwrap_or(f);
            self.files.push(FileEntry {
                path: rel.display().to_string(),
                sha256: hex_string(&digest),
            });
        }
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}
