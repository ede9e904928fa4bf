use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::Cli;

pub const MANIFEST_NAME: &str = "manifest.json";

/// Everything needed to reproduce a run's CSV output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub invocation: Cli,
    pub config_path: Option<String>,
    /// Effective parameters in config-file form.
    pub config: String,
    pub program_path: Option<String>,
    pub program: Option<String>,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
    pub shots: Option<u64>,
    pub versions: BTreeMap<String, String>,
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("qmem".to_string(), qmem::VERSION.to_string()),
        ("qmem-cli".to_string(), env!("CARGO_PKG_VERSION").to_string()),
    ])
}

pub fn load(path: &Path) -> anyhow::Result<RunManifest> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
}

pub fn write(dir: &Path, manifest: &RunManifest) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(manifest)?;
    std::fs::write(dir.join(MANIFEST_NAME), text + "\n").context("writing manifest")
}
