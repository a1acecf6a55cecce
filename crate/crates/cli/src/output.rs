use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::config::RunConfig;

#[derive(Debug, Serialize)]
struct FileDigest {
    path: String,
    bytes: usize,
    sha256: String,
}

fn digest(path: String, bytes: &[u8]) -> FileDigest {
    FileDigest {
        path,
        bytes: bytes.len(),
        sha256: hex::encode(Sha256::digest(bytes)),
    }
}

/// Collects a command's inputs and outputs, then writes every output plus a
/// manifest in one go.
///
/// Outputs are staged in memory and only land in the output directory once
/// all of them are ready, each through a temporary file that is renamed into
/// place, so a failed run never leaves a partial report behind.
pub struct Run {
    command: &'static str,
    config: RunConfig,
    config_digest: String,
    inputs: Vec<FileDigest>,
    outputs: Vec<(String, Vec<u8>)>,
}

impl Run {
    pub fn new(command: &'static str, config: RunConfig) -> Self {
        let config_digest = config.digest();
        Self {
            command,
            config,
            config_digest,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(digest(path.display().to_string(), &bytes));
        Ok(bytes)
    }

    /// Self-description stamped into every report.
    pub fn meta(&self) -> Value {
        json!({
            "tool": "convshape",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config_digest": self.config_digest,
        })
    }

    /// One-line comment header for CSV outputs.
    pub fn csv_header(&self) -> String {
        format!(
            "# convshape {} {} config_digest={}\n",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.config_digest
        )
    }

    pub fn markdown_header(&self) -> String {
        format!(
            "<!-- convshape {} {} config_digest={} -->\n\n",
            env!("CARGO_PKG_VERSION"),
            self.command,
            self.config_digest
        )
    }

    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.outputs.push((name.into(), bytes.into()));
    }

    pub fn add_json(&mut self, name: impl Into<String>, value: &Value) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("JSON value serializes");
        bytes.push(b'\n');
        self.add(name, bytes);
    }

    /// Writes all staged outputs and `manifest.json` into `dir`.
    pub fn commit(mut self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let manifest = json!({
            "tool": "convshape",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config_digest": self.config_digest,
            "config": self.config,
            "inputs": self.inputs,
            "outputs": self
                .outputs
                .iter()
                .map(|(name, bytes)| digest(name.clone(), bytes))
                .collect::<Vec<_>>(),
        });
        self.add_json("manifest.json", &manifest);

        let mut staged = Vec::with_capacity(self.outputs.len());
        for (name, bytes) in &self.outputs {
            let mut tmp = NamedTempFile::new_in(dir)
                .with_context(|| format!("staging output in {}", dir.display()))?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            staged.push((tmp, dir.join(name)));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, target) in staged {
            tmp.persist(&target)
                .with_context(|| format!("writing {}", target.display()))?;
            written.push(target);
        }
        Ok(written)
    }
}
