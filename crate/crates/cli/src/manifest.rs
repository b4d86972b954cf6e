// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

/// Hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

/// Everything needed to rerun a command and check its outputs.
///
/// Serialised as TOML next to the outputs. Holds no timestamps, so identical runs
/// produce identical manifests.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    /// Derived numbers worth keeping next to the data (bounds, threshold positions).
    pub results: BTreeMap<String, toml::Value>,
    pub outputs: Vec<OutputRecord>,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        let tolerances = [
            ("steady_state_residual", 1e-8),
            ("master_rtol", 1e-8),
            ("master_atol", 1e-10),
            ("trajectory_rtol", 1e-6),
            ("trajectory_atol", 1e-8),
            ("jade_tol", 1e-10),
            ("state_validity", 1e-10),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        Self {
            tool: "kerrnet".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: config.seed,
            tolerances,
            results: BTreeMap::new(),
            outputs: Vec::new(),
            config: config.clone(),
        }
    }

    /// Hash identifying the inputs of the run (everything except outputs and results).
    pub fn input_hash(&self) -> Result<String> {
        let mut m = self.clone();
        m.outputs.clear();
        m.results.clear();
        Ok(sha256_hex(toml::to_string(&m)?.as_bytes()))
    }

    pub fn result(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.results.insert(key.into(), value.into());
    }

    /// Writes `bytes` to `dir/name` and records its hash.
    pub fn write_output(&mut self, dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(OutputRecord { file: name.into(), sha256: sha256_hex(bytes) });
        Ok(path)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.toml");
        fs::write(&path, toml::to_string(self)?).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
