// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Kerr-cavity logic circuits: AND, NOT and the NAND latch.
//!
//! Each circuit is composed from a bundled network description and a
//! [`CavityFactory`], so swapping a full cavity for a reduced one changes nothing else.
//! [`closed`] holds the same triples written out by hand, used as oracles, and the
//! compact master equations used for simulation.

pub mod closed;
mod factory;
mod params;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use factory::CavityFactory;
pub use params::{AndParams, CavityParams, GateParams, LatchParams, NotParams};

use crate::dynamics::{mcwf_ensemble, DriveSchedule, ExpectationSeries, Observable, Segment, TrajectoryConfig};
use crate::error::{Error, Result};
use crate::fock::QuantumState;
use crate::slh::{CavityProvider, NetworkDescription, OpenSystem, ParametricOperator, SlhTriple};

/// Bundled network description of the AND gate.
pub const AND_NETWORK: &str = include_str!("../../networks/and.toml");
/// Bundled network description of the NOT gate.
pub const NOT_NETWORK: &str = include_str!("../../networks/not.toml");
/// Bundled network description of the NAND latch.
pub const LATCH_NETWORK: &str = include_str!("../../networks/latch.toml");

/// Logical output channel (1-based) of the AND gate.
pub const AND_OUTPUT: usize = 2;
/// Logical output channel (1-based) of the NOT gate.
pub const NOT_OUTPUT: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    And,
    Not,
    Latch,
}

impl GateKind {
    pub const ALL: [GateKind; 3] = [GateKind::And, GateKind::Not, GateKind::Latch];

    /// Number of cavities in the circuit.
    pub fn modes(&self) -> usize {
        match self {
            GateKind::Latch => 2,
            _ => 1,
        }
    }

    pub fn network(&self) -> &'static str {
        match self {
            GateKind::And => AND_NETWORK,
            GateKind::Not => NOT_NETWORK,
            GateKind::Latch => LATCH_NETWORK,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::And => "and",
            GateKind::Not => "not",
            GateKind::Latch => "latch",
        })
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "and" => Ok(GateKind::And),
            "not" => Ok(GateKind::Not),
            "latch" => Ok(GateKind::Latch),
            other => Err(Error::InvalidArgument(format!("unknown gate `{other}` (expected and, not or latch)"))),
        }
    }
}

fn check_modes(f: &CavityFactory, kind: GateKind) -> Result<()> {
    if f.modes() != kind.modes() {
        return Err(Error::InvalidArgument(format!(
            "{kind} needs {} cavities, factory provides {}",
            kind.modes(),
            f.modes()
        )));
    }
    Ok(())
}

/// Composes the bundled network of `kind`.
pub fn build_gate(kind: GateKind, f: &CavityFactory, p: &GateParams) -> Result<SlhTriple> {
    check_modes(f, kind)?;
    let desc = NetworkDescription::parse(kind.network())?;
    let bindings = match kind {
        GateKind::And => p.and_gate.bindings(),
        GateKind::Not => p.not_gate.bindings(),
        GateKind::Latch => p.latch.bindings(),
    };
    desc.build(f, &bindings)
}

/// AND gate with drive parameters `xi1`, `xi2`; three channels.
pub fn build_and(f: &CavityFactory, p: &GateParams) -> Result<SlhTriple> {
    build_gate(GateKind::And, f, p)
}

/// NOT gate with drive parameter `xi`; five channels.
pub fn build_not(f: &CavityFactory, p: &GateParams) -> Result<SlhTriple> {
    build_gate(GateKind::Not, f, p)
}

/// NAND latch with drive parameters `s_bar`, `r_bar`; six channels on two cavities.
pub fn build_nand_latch(f: &CavityFactory, p: &GateParams) -> Result<SlhTriple> {
    build_gate(GateKind::Latch, f, p)
}

/// Hand-written triple of `kind`.
pub fn closed_form(kind: GateKind, f: &CavityFactory, p: &GateParams) -> Result<SlhTriple> {
    check_modes(f, kind)?;
    match kind {
        GateKind::And => closed::closed_form_and(f, &p.and_gate),
        GateKind::Not => closed::closed_form_not(f, &p.not_gate),
        GateKind::Latch => closed::closed_form_latch(f, &p.latch),
    }
}

/// Compact `(H, [L_j])` master equation of `kind`.
///
/// Constant offsets in the output couplings only displace the output records; they
/// are folded into the Hamiltonian, leaving one collapse operator per independent
/// decay direction.
pub fn gate_master_equation(
    kind: GateKind,
    f: &CavityFactory,
    p: &GateParams,
) -> Result<(ParametricOperator, Vec<ParametricOperator>)> {
    check_modes(f, kind)?;
    match kind {
        GateKind::And => closed::compact_and(f),
        GateKind::Not => closed::compact_not(f, &p.not_gate),
        GateKind::Latch => closed::compact_latch(f, &p.latch),
    }
}

/// Everything needed to simulate one circuit.
#[derive(Clone, Debug)]
pub struct GateModel {
    pub kind: GateKind,
    /// Composed network triple.
    pub triple: SlhTriple,
    /// Compact master equation used for time evolution.
    pub system: OpenSystem,
    /// `eta` for AND/NOT; `n_a`, `n_b` for the latch.
    pub observables: Vec<Observable>,
    pub initial: QuantumState,
}

impl GateModel {
    pub fn new(kind: GateKind, f: &CavityFactory, p: &GateParams) -> Result<Self> {
        let triple = build_gate(kind, f, p)?;
        let (h, ls) = gate_master_equation(kind, f, p)?;
        let system = OpenSystem::new(f.space().clone(), &h, &ls)?;
        let observables = match kind {
            GateKind::And => vec![Observable::new("eta", triple.l()[AND_OUTPUT - 1].clone())],
            GateKind::Not => vec![Observable::new("eta", triple.l()[NOT_OUTPUT - 1].clone())],
            GateKind::Latch => vec![
                Observable::new("n_a", ParametricOperator::from_operator(f.number(0)?)),
                Observable::new("n_b", ParametricOperator::from_operator(f.number(1)?)),
            ],
        };
        Ok(Self { kind, triple, system, observables, initial: f.initial_state()? })
    }

    /// Trajectory-ensemble means of the gate observables.
    pub fn simulate(&self, schedule: &DriveSchedule, grid: &[f64], cfg: &TrajectoryConfig) -> Result<ExpectationSeries> {
        mcwf_ensemble(&self.initial, &self.system, schedule, grid, &self.observables, cfg)
    }
}

fn segments(names: &[&str], rows: &[(f64, f64, &[f64])], amplitude: f64) -> Vec<Segment> {
    rows.iter()
        .map(|(start, end, levels)| Segment {
            start: *start,
            end: *end,
            levels: names.iter().zip(levels.iter()).map(|(n, l)| (n.to_string(), C64::new(l * amplitude, 0.0))).collect(),
        })
        .collect()
}

/// Logic-level test pattern of `kind` with HIGH = `alpha` and input ramps of `ramp`.
///
/// AND: 2-unit segments (0,0) (1,1) (1,0) (1,1) (0,1) (0,0). NOT: 0, 1, 0.
/// Latch (`s_bar`, `r_bar`): (0,1) (1,1) (1,0) (1,1) (0,1).
pub fn test_pattern(kind: GateKind, alpha: f64, ramp: f64) -> Result<DriveSchedule> {
    let segs = match kind {
        GateKind::And => segments(
            &["xi1", "xi2"],
            &[
                (0.0, 2.0, &[0.0, 0.0]),
                (2.0, 4.0, &[1.0, 1.0]),
                (4.0, 6.0, &[1.0, 0.0]),
                (6.0, 8.0, &[1.0, 1.0]),
                (8.0, 10.0, &[0.0, 1.0]),
                (10.0, 12.0, &[0.0, 0.0]),
            ],
            alpha,
        ),
        GateKind::Not => {
            segments(&["xi"], &[(0.0, 2.0, &[0.0]), (2.0, 4.0, &[1.0]), (4.0, 6.0, &[0.0])], alpha)
        }
        GateKind::Latch => segments(
            &["s_bar", "r_bar"],
            &[
                (0.0, 2.0, &[0.0, 1.0]),
                (2.0, 4.0, &[1.0, 1.0]),
                (4.0, 6.0, &[1.0, 0.0]),
                (6.0, 8.0, &[1.0, 1.0]),
                (8.0, 10.0, &[0.0, 1.0]),
            ],
            alpha,
        ),
    };
    DriveSchedule::stepped(&segs, ramp)
}

/// HIGH amplitude of the inputs of `kind`.
pub fn high_level(kind: GateKind, p: &GateParams) -> f64 {
    match kind {
        GateKind::And => p.and_gate.alpha,
        GateKind::Not => p.not_gate.alpha,
        GateKind::Latch => p.latch.alpha,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::liouvillian;
    use crate::slh::drives;
    use nalgebra::DMatrix;

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().fold(0.0f64, |m, x| m.max(x.norm()))
    }

    fn check_equal(kind: GateKind, n: usize, samples: &[Vec<(&str, C64)>]) {
        let p = GateParams::default();
        let f = CavityFactory::full(kind.modes(), n, &p.cavity).unwrap();
        let g = build_gate(kind, &f, &p).unwrap();
        let o = closed_form(kind, &f, &p).unwrap();
        assert!(max_diff(g.s(), o.s()) < 1e-12, "{kind}: S differs");
        for s in samples {
            let dr = drives(s.iter().map(|(k, v)| (*k, *v)));
            let (cg, co) = (g.evaluate(&dr).unwrap(), o.evaluate(&dr).unwrap());
            for (x, y) in cg.l.iter().zip(&co.l) {
                assert!(x.sub(y).unwrap().op_norm() < 1e-9, "{kind}: L differs");
            }
            assert!(cg.h.sub(&co.h).unwrap().op_norm() < 1e-9, "{kind}: H differs");
        }
    }

    #[test]
    fn and_composition_matches_closed_form() {
        check_equal(GateKind::And, 6, &[vec![("xi1", C64::new(1.3, -0.4)), ("xi2", C64::new(-2.0, 0.7))]]);
    }

    #[test]
    fn not_composition_matches_closed_form() {
        check_equal(GateKind::Not, 6, &[vec![("xi", C64::new(0.8, 1.1))]]);
    }

    #[test]
    fn latch_composition_matches_closed_form() {
        check_equal(GateKind::Latch, 3, &[vec![("s_bar", C64::new(0.3, 0.2)), ("r_bar", C64::new(-1.2, 0.5))]]);
    }

    #[test]
    fn compact_master_equations_generate_the_same_dynamics() {
        let p = GateParams::default();
        for (kind, n, dr) in [
            (GateKind::And, 6, drives([("xi1", C64::new(1.5, 0.3)), ("xi2", C64::new(-0.4, 0.9))])),
            (GateKind::Not, 6, drives([("xi", C64::new(2.0, -1.0))])),
            (GateKind::Latch, 3, drives([("s_bar", C64::new(0.7, 0.0)), ("r_bar", C64::new(0.1, -0.6))])),
        ] {
            let f = CavityFactory::full(kind.modes(), n, &p.cavity).unwrap();
            let full = build_gate(kind, &f, &p).unwrap().to_open_system().unwrap();
            let (h, ls) = gate_master_equation(kind, &f, &p).unwrap();
            let compact = OpenSystem::new(f.space().clone(), &h, &ls).unwrap();
            let (h1, l1) = full.evaluate(&dr).unwrap();
            let (h2, l2) = compact.evaluate(&dr).unwrap();
            let d = liouvillian(&h1, &l1).unwrap().sub(&liouvillian(&h2, &l2).unwrap()).unwrap().max_abs();
            assert!(d < 1e-9, "{kind}: Liouvillians differ by {d:e}");
        }
    }

    #[test]
    fn wrong_cavity_count_is_rejected() {
        let p = GateParams::default();
        let f = CavityFactory::full(1, 3, &p.cavity).unwrap();
        assert!(build_nand_latch(&f, &p).is_err());
    }

    #[test]
    fn gate_kinds_round_trip_through_strings() {
        for k in GateKind::ALL {
            assert_eq!(k.to_string().parse::<GateKind>().unwrap(), k);
        }
    }
}
