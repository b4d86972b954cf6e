// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Algebra-equivalence and state-validity checks with a machine-readable report.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use kerrnet::dynamics::liouvillian;
use kerrnet::fock::{QuantumState, STATE_TOL};
use kerrnet::gates::{build_gate, closed_form, gate_master_equation, CavityFactory, GateKind, GateParams};
use kerrnet::reduction::{BlockConvention, ReductionBasis};
use kerrnet::slh::{drives, CavityProvider, Drives, OpenSystem, SlhTriple};

/// Tolerance for the scattering matrices, which involve no operator algebra.
pub const S_TOL: f64 = 1e-12;
/// Operator-norm tolerance for coupling vectors and Hamiltonians.
pub const OP_TOL: f64 = 1e-9;
pub const UNITARY_TOL: f64 = 1e-10;
/// Entrywise tolerance for compact-versus-full Liouvillians.
pub const LIOUVILLIAN_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn push(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.checks.push(Check { name: name.into(), value, tolerance, passed: value <= tolerance });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Differences between two triples at one drive assignment.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TripleDistance {
    pub s: f64,
    pub l: f64,
    pub h: f64,
}

fn max_entry(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.norm()))
}

/// `max |S1 - S2|`, `max_j ||L1_j - L2_j||` and `||H1 - H2||` (operator norms) at `dr`.
pub fn triple_distance(a: &SlhTriple, b: &SlhTriple, dr: &Drives) -> anyhow::Result<TripleDistance> {
    if a.channels() != b.channels() {
        anyhow::bail!("channel counts differ: {} vs {}", a.channels(), b.channels());
    }
    let (ca, cb) = (a.evaluate(dr)?, b.evaluate(dr)?);
    let mut l = 0.0f64;
    for (x, y) in ca.l.iter().zip(&cb.l) {
        l = l.max(x.sub(y)?.op_norm());
    }
    Ok(TripleDistance { s: max_entry(&(a.s() - b.s())), l, h: ca.h.sub(&cb.h)?.op_norm() })
}

/// `count` random complex drive assignments with components in `[-scale, scale]`.
pub fn random_drives(names: &[String], count: usize, scale: f64, seed: u64) -> Vec<Drives> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            drives(names.iter().map(|n| {
                let re = rng.random_range(-scale..=scale);
                let im = rng.random_range(-scale..=scale);
                (n.clone(), C64::new(re, im))
            }))
        })
        .collect()
}

/// Worst composed-versus-closed-form distance over random drives.
pub fn gate_equivalence(
    kind: GateKind,
    f: &CavityFactory,
    p: &GateParams,
    samples: usize,
    seed: u64,
    perturb: f64,
) -> anyhow::Result<TripleDistance> {
    let composed = build_gate(kind, f, p)?;
    let mut oracle = closed_form(kind, f, p)?;
    if perturb != 0.0 {
        oracle = perturbed(&oracle, perturb)?;
    }
    let mut worst = TripleDistance::default();
    for dr in random_drives(&composed.params(), samples, 5.0, seed) {
        let d = triple_distance(&composed, &oracle, &dr)?;
        worst.s = worst.s.max(d.s);
        worst.l = worst.l.max(d.l);
        worst.h = worst.h.max(d.h);
    }
    Ok(worst)
}

/// Adds `eps * (a + a^dagger)` on cavity 0 to the Hamiltonian of `g`.
fn perturbed(g: &SlhTriple, eps: f64) -> anyhow::Result<SlhTriple> {
    let a = kerrnet::fock::annihilation(g.space(), 0)?;
    let x = a.add(&a.dagger())?.scale(C64::new(eps, 0.0));
    let h = g.h().add(&kerrnet::slh::ParametricOperator::from_operator(x))?;
    Ok(SlhTriple::new(g.space().clone(), g.s().clone(), g.l().to_vec(), h)?)
}

/// Largest entrywise difference between the compact and the full gate Liouvillians.
pub fn compact_equivalence(kind: GateKind, f: &CavityFactory, p: &GateParams, seed: u64) -> anyhow::Result<f64> {
    let full = build_gate(kind, f, p)?.to_open_system()?;
    let (h, ls) = gate_master_equation(kind, f, p)?;
    let compact = OpenSystem::new(f.space().clone(), &h, &ls)?;
    let mut worst = 0.0f64;
    for dr in random_drives(full.params(), 3, 5.0, seed) {
        let (h1, l1) = full.evaluate(&dr)?;
        let (h2, l2) = compact.evaluate(&dr)?;
        let d = liouvillian(&h1, &l1)?.sub(&liouvillian(&h2, &l2)?)?.max_abs();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Random unitary (QR of a seeded complex Gaussian-like matrix) basis on `n` levels.
pub fn random_basis(n: usize, d: usize, seed: u64) -> anyhow::Result<ReductionBasis> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let q = m.qr().q();
    Ok(ReductionBasis { t: q, d, lambda: 1.0, weights: vec![], convention: BlockConvention::Last, manifest_hash: None })
}

fn validity_check(report: &mut Report, name: &str, state: &QuantumState) {
    let v = state.validity();
    report.push(format!("{name}: trace defect"), v.trace_defect, STATE_TOL);
    report.push(format!("{name}: hermiticity defect"), v.hermiticity_defect, STATE_TOL);
    report.push(format!("{name}: negative eigenvalue"), (-v.min_eigenvalue).max(0.0), STATE_TOL);
}

/// Runs every check; `fault` perturbs the closed-form oracles by that amount.
pub fn run(p: &GateParams, seed: u64, fault: f64) -> anyhow::Result<Report> {
    let mut report = Report::default();
    for kind in GateKind::ALL {
        let n = if kind.modes() == 1 { 10 } else { 6 };
        let f = CavityFactory::full(kind.modes(), n, &p.cavity)?;
        let d = gate_equivalence(kind, &f, p, 10, seed, fault)?;
        report.push(format!("{kind}: composed vs closed form, S"), d.s, S_TOL);
        report.push(format!("{kind}: composed vs closed form, L"), d.l, OP_TOL);
        report.push(format!("{kind}: composed vs closed form, H"), d.h, OP_TOL);

        let s = build_gate(kind, &f, p)?.s().clone();
        let defect = max_entry(&(s.adjoint() * &s - DMatrix::identity(s.nrows(), s.ncols())));
        report.push(format!("{kind}: S unitarity defect"), defect, UNITARY_TOL);

        let c = compact_equivalence(kind, &f, p, seed)?;
        report.push(format!("{kind}: compact vs full Liouvillian"), c, LIOUVILLIAN_TOL);

        let basis = random_basis(n, n - 2, seed)?;
        let fr = CavityFactory::reduced(kind.modes(), &basis, &p.cavity)?;
        let d = gate_equivalence(kind, &fr, p, 3, seed, fault)?;
        report.push(format!("{kind}: reduced composed vs reduced closed form, L"), d.l, OP_TOL);
        report.push(format!("{kind}: reduced composed vs reduced closed form, H"), d.h, OP_TOL);

        let sys = build_gate(kind, &f, p)?.to_open_system()?;
        let dr = random_drives(sys.params(), 1, 2.0, seed).remove(0);
        let (h, ls) = sys.evaluate(&dr)?;
        let rho = kerrnet::dynamics::steady_state(&h, &ls)?;
        validity_check(&mut report, &format!("{kind}: steady state"), &rho);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_run_passes() {
        let r = run(&GateParams::default(), 3, 0.0).unwrap();
        let bad: Vec<_> = r.failures().map(|c| c.name.clone()).collect();
        assert!(r.passed(), "failing checks: {bad:?}");
    }

    #[test]
    fn injected_fault_is_caught() {
        let r = run(&GateParams::default(), 3, 1e-6).unwrap();
        assert!(!r.passed());
        assert!(r.failures().all(|c| c.name.contains("closed form, H")));
    }

    #[test]
    fn random_basis_is_unitary() {
        let b = random_basis(5, 3, 1).unwrap();
        b.validate().unwrap();
    }
}
