//! Run manifests and report emission.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

pub fn digest(path: &Path) -> Result<InputDigest> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(InputDigest {
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

/// Everything needed to reproduce one command invocation.
pub struct Run {
    pub command: &'static str,
    pub config: Value,
    pub seed: u64,
    pub seed_defaulted: bool,
    pub inputs: Vec<InputDigest>,
    pub warnings: Vec<String>,
}

impl Run {
    pub fn new<C: Serialize>(command: &'static str, config: &C, seed: Option<u64>) -> Result<Self> {
        let mut run = Run {
            command,
            config: serde_json::to_value(config)?,
            seed: seed.unwrap_or(0),
            seed_defaulted: seed.is_none(),
            inputs: Vec::new(),
            warnings: Vec::new(),
        };
        if run.seed_defaulted {
            run.warn("no --seed given; using seed 0");
        }
        Ok(run)
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        eprintln!("warning: {message}");
        self.warnings.push(message);
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(digest(path)?);
        Ok(())
    }

    pub fn manifest(&self) -> Value {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        json!({
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "seed_defaulted": self.seed_defaulted,
            "tool": "kappabound",
            "version": env!("CARGO_PKG_VERSION"),
            "inputs": self.inputs,
            "timestamp_unix": timestamp,
        })
    }

    /// Prints the text block (or the JSON document with `json`) and writes
    /// the JSON document to `out` when given.
    pub fn emit(&self, result: Value, text: &str, out: Option<&Path>, json: bool) -> Result<()> {
        let doc = json!({
            "manifest": self.manifest(),
            "result": result,
            "warnings": self.warnings,
        });
        let body = serde_json::to_string_pretty(&doc)? + "\n";
        if let Some(path) = out {
            fs::write(path, &body).with_context(|| format!("writing {}", path.display()))?;
        }
        if json {
            print!("{body}");
        } else {
            print!("{text}");
        }
        Ok(())
    }
}
