// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single Kerr cavity: loss rate per mirror, detuning and Kerr coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityParams {
    pub kappa: f64,
    pub delta: f64,
    pub chi: f64,
}

impl Default for CavityParams {
    fn default() -> Self {
        Self { kappa: 25.0, delta: 50.0, chi: -50.0 / 60.0 }
    }
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidArgument(format!("kappa = {} must be positive", self.kappa)));
        }
        if !(self.delta.is_finite() && self.chi.is_finite()) {
            return Err(Error::InvalidArgument("delta and chi must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AndParams {
    pub phi: f64,
    pub theta: f64,
    /// HIGH input amplitude.
    pub alpha: f64,
}

impl Default for AndParams {
    fn default() -> Self {
        Self { phi: 1.572, theta: 1.073, alpha: 22.6274 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NotParams {
    pub theta: f64,
    pub theta_p: f64,
    pub phi_p: f64,
    pub alpha: f64,
    pub beta: C64,
    pub beta_p: C64,
}

impl Default for NotParams {
    fn default() -> Self {
        Self {
            theta: 0.891,
            theta_p: 1.071,
            phi_p: 2.03,
            alpha: 22.6274,
            beta: C64::new(-34.289, -11.909),
            beta_p: C64::new(7.833, -17.656),
        }
    }
}

/// Latch parameters. `theta_p` and `phi_p` are carried for completeness; the latch
/// network and its closed form do not use them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatchParams {
    pub theta: f64,
    pub phi: f64,
    pub beta: C64,
    pub alpha: f64,
    pub theta_p: f64,
    pub phi_p: f64,
}

impl Default for LatchParams {
    fn default() -> Self {
        Self { theta: 0.891, phi: 2.546, beta: C64::new(-34.289, -11.909), alpha: 22.6274, theta_p: 0.566, phi_p: 0.158 }
    }
}

/// All gate parameters; angles in radians.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateParams {
    pub cavity: CavityParams,
    #[serde(rename = "and")]
    pub and_gate: AndParams,
    #[serde(rename = "not")]
    pub not_gate: NotParams,
    pub latch: LatchParams,
}

/// Named constants referenced by the bundled network descriptions.
pub(crate) fn bindings(pairs: &[(&str, C64)]) -> BTreeMap<String, C64> {
    let mut m: BTreeMap<String, C64> = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    m.insert("quarter_pi".into(), C64::new(FRAC_PI_4, 0.0));
    m
}

impl AndParams {
    pub(crate) fn bindings(&self) -> BTreeMap<String, C64> {
        bindings(&[("theta", self.theta.into()), ("phi", self.phi.into())])
    }
}

impl NotParams {
    pub(crate) fn bindings(&self) -> BTreeMap<String, C64> {
        bindings(&[
            ("theta", self.theta.into()),
            ("theta_p", self.theta_p.into()),
            ("phi_p", self.phi_p.into()),
            ("alpha", self.alpha.into()),
            ("beta", self.beta),
            ("beta_p", self.beta_p),
        ])
    }
}

impl LatchParams {
    pub(crate) fn bindings(&self) -> BTreeMap<String, C64> {
        bindings(&[("theta", self.theta.into()), ("phi", self.phi.into()), ("beta", self.beta)])
    }
}
