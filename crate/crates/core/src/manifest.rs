//! Run manifests: what went into a command and what came out.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

impl FileDigest {
    pub fn of(path: &Path, contents: &[u8]) -> Self {
        FileDigest {
            path: path.to_path_buf(),
            sha256: sha256_hex(contents),
            bytes: contents.len() as u64,
        }
    }
}

/// Everything needed to reproduce a run. The identifier hashes the command,
/// flags, version and input contents but not paths or the clock, so equal
/// runs get equal identifiers wherever they happen.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub run_id: String,
    pub created_at: String,
    pub inputs: Vec<FileDigest>,
    pub flags: BTreeMap<String, String>,
    pub seeds: Vec<u64>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn new(command: &str, inputs: Vec<FileDigest>, flags: BTreeMap<String, String>, seeds: Vec<u64>) -> Self {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0]);
        h.update(TOOL_VERSION.as_bytes());
        for d in &inputs {
            h.update([0]);
            h.update(d.sha256.as_bytes());
        }
        for (k, v) in &flags {
            h.update([0]);
            h.update(k.as_bytes());
            h.update([b'=']);
            h.update(v.as_bytes());
        }
        for s in &seeds {
            h.update(s.to_le_bytes());
        }
        let run_id = hex::encode(&h.finalize()[..8]);
        RunManifest {
            tool: "lprisk",
            version: TOOL_VERSION,
            command: command.to_string(),
            run_id,
            created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            inputs,
            flags,
            seeds,
            outputs: Vec::new(),
        }
    }

    /// Line appended to Markdown artifacts.
    pub fn footer(&self) -> String {
        format!("Generated by lprisk {} (run {}).", self.version, self.run_id)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
