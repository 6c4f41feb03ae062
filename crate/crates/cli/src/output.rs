//! Output staging, CSV formatting and run manifests.
//!
//! Outputs are staged in memory and written only once a command has
//! succeeded, so a failed run leaves no partial files behind.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use hybridspin::PhysicalConstants;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

/// Shortest format that always round-trips an f64: 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV table built column by column as strings.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Table { writer }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn constants_hash(c: &PhysicalConstants) -> String {
    sha256_hex(c.canonical_string().as_bytes())
}

pub fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("results always serialize");
    v.push(b'\n');
    v
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub tool_version: &'a str,
    pub config: &'a RunConfig,
    pub workers: Option<usize>,
    pub constants_hash: String,
    pub wall_time_s: f64,
    /// File name to SHA-256.
    pub outputs: BTreeMap<String, String>,
    pub summary: serde_json::Value,
}

/// Files produced by a command, plus a small JSON summary for the manifest.
#[derive(Default)]
pub struct Staged {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: serde_json::Value,
    /// Set when outputs are worth keeping but the run counts as a
    /// numerical failure (a fit that did not converge).
    pub failure: Option<String>,
}

impl Staged {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }
}

/// Writes staged files and `manifest.json` into `dir`; returns the
/// checksum map.
pub fn commit(
    dir: &Path,
    command: &str,
    cfg: &RunConfig,
    workers: Option<usize>,
    staged: Staged,
    wall_time_s: f64,
) -> Result<BTreeMap<String, String>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut outputs = BTreeMap::new();
    for (name, bytes) in &staged.files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        outputs.insert(name.clone(), sha256_hex(bytes));
    }
    let manifest = Manifest {
        command,
        tool_version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        workers,
        constants_hash: constants_hash(&PhysicalConstants::default()),
        wall_time_s,
        outputs: outputs.clone(),
        summary: staged.summary,
    };
    let path = dir.join("manifest.json");
    fs::write(&path, json(&manifest)).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(outputs)
}
