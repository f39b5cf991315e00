//! File emission: atomic writes (temp + rename), input digests, and the
//! per-run manifest.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Writes atomically: the content lands under a temporary name in the same
/// directory and is renamed into place.
pub fn atomic_write(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Run metadata written alongside every command's outputs. The duration is
/// informative only; all other fields are reproducible.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub input_digest: Option<String>,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn write(&self, out_dir: &Path) -> std::io::Result<PathBuf> {
        let path = out_dir.join("manifest.json");
        let body = serde_json::to_string_pretty(self).expect("manifest serializes");
        atomic_write(&path, &format!("{body}\n"))?;
        Ok(path)
    }
}

/// Shortest-round-trip float formatting shared by all CSV emitters, so
/// fixed-seed reruns are byte-identical.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
