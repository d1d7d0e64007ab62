//! Atomic report writing and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Provenance record written next to every report file as
/// `<report>.manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub args: Vec<String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    /// Records resolvable at each geographic scale.
    pub n_by_scale: BTreeMap<String, u64>,
    /// UTC, RFC 3339; `SOURCE_DATE_EPOCH` overrides the clock.
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(inputs: &[&Path]) -> Result<Self, CliError> {
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            args: std::env::args().skip(1).collect(),
            inputs: inputs.iter().map(|p| digest_file(p)).collect::<Result<_, _>>()?,
            outputs: Vec::new(),
            n_by_scale: BTreeMap::new(),
            timestamp: timestamp(),
        })
    }
}

fn timestamp() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0))
        .unwrap_or_else(Utc::now);
    now.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn digest_bytes(path: &Path, bytes: &[u8]) -> FileDigest {
    FileDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(bytes)),
        bytes: bytes.len() as u64,
    }
}

pub fn digest_file(path: &Path) -> Result<FileDigest, CliError> {
    let mut file = fs::File::open(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    let bytes = io::copy(&mut file, &mut hasher).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: hex::encode(hasher.finalize()),
        bytes,
    })
}

/// Writes `bytes` to `path` via a temporary file in the same directory and a
/// rename, so readers never see a partial report.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let fail = |e: &dyn std::fmt::Display| CliError::input(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| fail(&e))?;
    tmp.write_all(bytes).map_err(|e| fail(&e))?;
    tmp.as_file().sync_all().map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

pub fn manifest_path(report: &Path) -> PathBuf {
    let mut name = report.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    report.with_file_name(name)
}

/// Report destination: a file (with manifest) or standard output.
pub struct Sink {
    pub path: Option<PathBuf>,
}

impl Sink {
    pub fn new(path: Option<PathBuf>) -> Self {
        Self { path }
    }

    /// Emits the report; when it goes to a file, also writes the manifest
    /// with the report's digest appended.
    pub fn emit(&self, report: &[u8], mut manifest: RunManifest) -> Result<(), CliError> {
        match &self.path {
            None => {
                let mut out = io::stdout().lock();
                out.write_all(report)
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::input(format!("cannot write to stdout: {e}")))
            }
            Some(path) => {
                write_atomic(path, report)?;
                manifest.outputs.push(digest_bytes(path, report));
                write_manifest(path, &manifest)
            }
        }
    }
}

pub fn write_manifest(report: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let mut json = serde_json::to_vec_pretty(manifest).map_err(CliError::input)?;
    json.push(b'\n');
    write_atomic(&manifest_path(report), &json)
}
