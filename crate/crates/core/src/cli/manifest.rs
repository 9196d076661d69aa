//! Run manifest: resolved inputs, their content hash and the hashes of every emitted file.
//!
//! Nothing run-specific (timestamps, thread counts, paths) is recorded, so
//! identical manifests correspond to byte-identical CSV output.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentSpec;
use crate::error::{Error, Result};
use crate::montecarlo::{z_value, DEFAULT_CONFIDENCE};

/// SHA-256 over a git blob header (`blob <len>\0`) followed by the content.
pub fn git_style_hash(content: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", content.len()).as_bytes());
    hasher.update(content);
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub preset: String,
    pub seed: u64,
    pub input: serde_json::Value,
    pub input_hash: String,
    pub confidence: f64,
    pub z: f64,
    pub outputs: Vec<OutputFile>,
    /// Preset-specific results such as KS distances and censoring counts.
    pub extra: serde_json::Value,
}

impl Manifest {
    pub fn new(
        spec: &ExperimentSpec,
        outputs: Vec<OutputFile>,
        extra: serde_json::Value,
    ) -> Result<Self> {
        let input = serde_json::to_value(spec).map_err(|e| Error::Parse(e.to_string()))?;
        let canonical = serde_json::to_string(&input).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            preset: spec.preset.name().to_string(),
            seed: spec.seed,
            input_hash: git_style_hash(canonical.as_bytes()),
            input,
            confidence: DEFAULT_CONFIDENCE,
            z: z_value(DEFAULT_CONFIDENCE)?,
            outputs,
            extra,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text =
            serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        serde_json::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| Error::Parse(e.to_string()))
    }
}
