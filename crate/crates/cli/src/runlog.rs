use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// One line of `runs.ndjson`.
#[derive(Serialize)]
pub struct RunRecord {
    pub argv: Vec<String>,
    pub config: Value,
    pub inputs: Vec<InputDigest>,
    /// Digest of the stdout JSON with the `timing` key removed.
    pub output_sha256: String,
    pub exit_code: i32,
    pub wall_s: f64,
    pub outcome: Value,
}

#[derive(Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Compact JSON of `value` without its top-level `timing` entry.
pub fn stable_bytes(value: &Value) -> Vec<u8> {
    let mut v = value.clone();
    if let Value::Object(map) = &mut v {
        map.remove("timing");
    }
    serde_json::to_vec(&v).expect("json values serialize")
}

pub fn log_dir() -> PathBuf {
    std::env::var_os("LNC_LOG_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".lnc"))
}

pub fn append(dir: &Path, record: &RunRecord) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut line = serde_json::to_vec(record)?;
    line.push(b'\n');
    let mut f = OpenOptions::new().create(true).append(true).open(dir.join("runs.ndjson"))?;
    f.write_all(&line)
}
