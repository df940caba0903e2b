//! Run manifests: what was run, with which config, and what it produced.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use ssml_core::experiments::{Dataset, GlobalConfig, LocalConfig, MultiscaleConfig};

pub const MANIFEST_FILE: &str = "manifest.json";

/// A resolved experiment configuration, tagged by dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dataset", content = "config", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Local(LocalConfig),
    Global(GlobalConfig),
    Multiscale(MultiscaleConfig),
}

impl ExperimentConfig {
    pub fn dataset(&self) -> Dataset {
        match self {
            ExperimentConfig::Local(_) => Dataset::Local,
            ExperimentConfig::Global(_) => Dataset::Global,
            ExperimentConfig::Multiscale(_) => Dataset::Multiscale,
        }
    }

    pub fn master_seed(&self) -> u64 {
        match self {
            ExperimentConfig::Local(c) => c.master_seed,
            ExperimentConfig::Global(c) => c.master_seed,
            ExperimentConfig::Multiscale(c) => c.master_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub schema_version: u32,
    #[serde(flatten)]
    pub experiment: ExperimentConfig,
    pub master_seed: u64,
    pub threads: usize,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest(name: &str, contents: &str) -> OutputDigest {
    OutputDigest {
        file: name.to_string(),
        sha256: sha256_hex(contents.as_bytes()),
    }
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if manifest.master_seed != manifest.experiment.master_seed() {
        bail!("manifest seed disagrees with its embedded config");
    }
    Ok(manifest)
}

/// Files whose digests differ between two manifests.
pub fn digest_mismatches(expected: &RunManifest, actual: &RunManifest) -> Vec<String> {
    let mut bad = Vec::new();
    for e in &expected.outputs {
        match actual.outputs.iter().find(|a| a.file == e.file) {
            Some(a) if a.sha256 == e.sha256 => {}
            _ => bad.push(e.file.clone()),
        }
    }
    bad
}
