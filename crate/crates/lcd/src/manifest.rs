//! Run manifests: the command, every resolved parameter and the digests of
//! all inputs and outputs. No timestamps, so identical runs produce
//! identical manifests.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::outputs::{to_json_bytes, write_bytes};

/// A file and its SHA-256.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    /// Path as given on the command line.
    pub path: String,
    /// Lowercase hex SHA-256 of the contents.
    pub sha256: String,
}

/// Manifest written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Producing tool.
    pub tool: String,
    /// Tool version.
    pub version: String,
    /// Arguments after the program name.
    pub command: Vec<String>,
    /// Resolved parameters, defaults included.
    pub params: BTreeMap<String, serde_json::Value>,
    /// Digests of the files read.
    pub inputs: Vec<FileDigest>,
    /// Digests of the files written.
    pub outputs: Vec<FileDigest>,
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Lowercase hex SHA-256 of a file's contents.
pub fn file_sha256(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Where the manifest of `output` goes: `<output>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Collects parameters and file digests for one command.
#[derive(Debug, Clone)]
pub struct ManifestBuilder {
    manifest: RunManifest,
}

impl ManifestBuilder {
    /// Starts a manifest for `command` (arguments after the program name).
    pub fn new(command: Vec<String>) -> Self {
        ManifestBuilder {
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command,
                params: BTreeMap::new(),
                inputs: Vec::new(),
                outputs: Vec::new(),
            },
        }
    }

    /// Records a resolved parameter.
    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.manifest.params.insert(key.into(), v);
        self
    }

    /// Records an input file.
    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        let sha256 = file_sha256(path)?;
        self.manifest.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256,
        });
        Ok(self)
    }

    /// Records an output file; call after it is written.
    pub fn output(&mut self, path: &Path) -> Result<&mut Self> {
        let sha256 = file_sha256(path)?;
        self.manifest.outputs.push(FileDigest {
            path: path.display().to_string(),
            sha256,
        });
        Ok(self)
    }

    /// The manifest so far.
    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    /// Writes the manifest beside `primary_output` and returns its path.
    pub fn write_beside(&self, primary_output: &Path) -> Result<PathBuf> {
        let path = manifest_path(primary_output);
        write_bytes(&path, &to_json_bytes(&self.manifest)?)?;
        Ok(path)
    }
}
