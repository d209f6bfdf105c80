//! File formats, benchmark-graph generators, parallel sweeps and reports on
//! top of `memtree-core`.

pub mod artifact;
pub mod generate;
pub mod graphfile;
pub mod report;
pub mod sweep;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Short hash of a value's JSON encoding, recorded next to every result so
/// rows from different configurations are never confused.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("config serializes");
    hex::encode(&Sha256::digest(&json)[..8])
}

/// Writes `bytes` to `path`, or to stdout for `-`.
pub fn write_output(path: &std::path::Path, bytes: &[u8]) -> std::io::Result<()> {
    if path.as_os_str() == "-" {
        use std::io::Write;
        std::io::stdout().write_all(bytes)
    } else {
        std::fs::write(path, bytes)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("value serializes");
    v.push(b'\n');
    v
}
