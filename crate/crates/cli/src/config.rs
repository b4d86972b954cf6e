// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use kerrnet::gates::{GateKind, GateParams};

/// Which cavity representation a run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Full,
    Reduced,
}

impl ModelKind {
    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::Full => "full",
            ModelKind::Reduced => "reduced",
        }
    }
}

/// Time-evolution method for `sweep-time`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Master,
    Mcwf,
}

/// Inclusive arithmetic grid `start, start + step, ..., stop`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.stop >= self.start) {
            bail!("grid needs step > 0 and stop >= start, got {self:?}");
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|k| self.start + k as f64 * self.step).collect())
    }
}

/// Parameters shared by every subcommand; each command reads the fields it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: GateParams,
    /// Fock levels of the full single-cavity model.
    pub n: usize,
    /// Retained dimension of the reduced model.
    pub d: usize,
    /// Training drive amplitude; defaults to the HIGH level.
    pub lambda: Option<f64>,
    /// Basis file for reduced models; built on the fly when absent.
    pub basis: Option<PathBuf>,
    pub models: Vec<ModelKind>,
    pub eps: Grid,
    pub d_grid: Vec<usize>,
    /// Drive amplitudes at which fidelity curves are taken; defaults to
    /// `sqrt(2) λ` and `λ / sqrt(2)`.
    pub fidelity_eps: Option<Vec<f64>>,
    pub gate: GateKind,
    pub ramp: f64,
    /// Output samples per unit time.
    pub samples_per_unit: usize,
    pub trajectories: usize,
    pub seed: u64,
    pub method: Method,
    /// Slope of the linear drive ramp of `sweep-time`.
    pub drive_slope: f64,
    pub t_end: f64,
    /// Per-mode Fock levels of the full latch cross-check (`--long` uses `n`).
    pub latch_full_n: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: GateParams::default(),
            n: 75,
            d: 15,
            lambda: None,
            basis: None,
            models: vec![ModelKind::Full, ModelKind::Reduced],
            eps: Grid { start: 0.0, stop: 40.0, step: 0.5 },
            d_grid: (1..=15).map(|k| 5 * k).collect(),
            fidelity_eps: None,
            gate: GateKind::And,
            ramp: 0.2,
            samples_per_unit: 20,
            trajectories: 100,
            seed: 1,
            method: Method::Master,
            drive_slope: 4.0,
            t_end: 10.0,
            latch_full_n: 40,
        }
    }
}

impl ExperimentConfig {
    /// Reads a TOML config; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: Self = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let (Some(b), Some(dir)) = (cfg.basis.as_mut(), path.parent()) {
            if b.is_relative() {
                *b = dir.join(&*b);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.cavity.validate()?;
        if self.n < 2 {
            bail!("n = {} is too small", self.n);
        }
        if self.d == 0 || self.d > self.n {
            bail!("d = {} must lie in 1..={}", self.d, self.n);
        }
        if self.models.is_empty() {
            bail!("no models selected");
        }
        if self.d_grid.iter().any(|&d| d == 0 || d > self.n) {
            bail!("d_grid entries must lie in 1..={}", self.n);
        }
        self.eps.points()?;
        if let Some(b) = &self.basis {
            if !b.exists() {
                bail!("basis file {} does not exist", b.display());
            }
        }
        if !(self.t_end > 0.0) || self.samples_per_unit == 0 {
            bail!("time grid must be non-empty");
        }
        Ok(())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda.unwrap_or(self.params.and_gate.alpha)
    }

    pub fn fidelity_eps(&self) -> Vec<f64> {
        self.fidelity_eps.clone().unwrap_or_else(|| {
            let l = self.lambda();
            vec![std::f64::consts::SQRT_2 * l, l / std::f64::consts::SQRT_2]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_both_ends() {
        let g = Grid { start: 0.0, stop: 40.0, step: 0.5 }.points().unwrap();
        assert_eq!(g.len(), 81);
        assert_eq!(*g.last().unwrap(), 40.0);
    }

    #[test]
    fn empty_config_is_all_defaults() {
        let c: ExperimentConfig = toml::from_str("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert!((c.lambda() - 22.6274).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ExperimentConfig>("nn = 3").is_err());
    }
}
