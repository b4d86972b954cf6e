// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Numerical experiments behind the subcommands, free of file handling.

use anyhow::{bail, Context, Result};
use num_complex::Complex64 as C64;

use kerrnet::dynamics::{
    master_evolve, mcwf_ensemble, steady_state, uniform_grid, DriveSchedule, EvolveOptions, ExpectationSeries,
    Observable, TrajectoryConfig,
};
use kerrnet::fock::QuantumState;
use kerrnet::gates::{CavityFactory, CavityParams};
use kerrnet::reduction::{
    build_basis, embed_fock_state, embed_jade_state, fidelity, fock_truncation_basis, JadeOptions, ReductionBasis,
};
use kerrnet::slh::{
    cavity_from_ops, displacement, drives, identity_network, CavityProvider, DriveExpr, ParametricOperator, SlhTriple,
};

/// Name of the drive amplitude on the first cavity input.
pub const DRIVE: &str = "eps";

/// Single cavity `K < (D_eps + 1)`: channel 1 reflects, channel 2 transmits.
pub fn driven_cavity(f: &CavityFactory) -> Result<SlhTriple> {
    let k = cavity_from_ops(f.lowering(0)?, f.bare_hamiltonian(0)?, f.kappa())?;
    let inputs = displacement(f.space(), DriveExpr::drive(DRIVE))?.concat(&identity_network(f.space(), 1)?)?;
    Ok(k.series(&inputs)?)
}

/// Steady state of the driven cavity at real amplitude `eps`.
pub fn cavity_steady_state(f: &CavityFactory, eps: f64) -> Result<QuantumState> {
    let g = driven_cavity(f)?;
    let c = g.evaluate(&drives([(DRIVE, C64::new(eps, 0.0))]))?;
    steady_state(&c.h, &c.l).with_context(|| format!("steady state at eps = {eps}"))
}

/// Mean reflected and transmitted output fields at one drive amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutputPoint {
    pub eps: f64,
    pub reflected: C64,
    pub transmitted: C64,
}

/// Steady-state outputs over `eps`; also returns each steady state.
pub fn steady_sweep(f: &CavityFactory, eps: &[f64]) -> Result<Vec<(OutputPoint, QuantumState)>> {
    let g = driven_cavity(f)?;
    eps.iter()
        .map(|&e| {
            let dr = drives([(DRIVE, C64::new(e, 0.0))]);
            let c = g.evaluate(&dr)?;
            let rho = steady_state(&c.h, &c.l).with_context(|| format!("steady state at eps = {e}"))?;
            let reflected = rho.expect(&c.l[0])?;
            let transmitted = rho.expect(&c.l[1])?;
            Ok((OutputPoint { eps: e, reflected, transmitted }, rho))
        })
        .collect()
}

/// Drive amplitude of the steepest rise of `|<transmitted>|` (forward differences,
/// reported at the midpoint of the steepest interval).
pub fn steepest_rise(points: &[OutputPoint]) -> Option<(f64, f64)> {
    points
        .windows(2)
        .map(|w| {
            let slope = (w[1].transmitted.norm() - w[0].transmitted.norm()) / (w[1].eps - w[0].eps);
            (0.5 * (w[0].eps + w[1].eps), slope)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

/// Largest relative deviation of reduced from full output magnitudes, over points
/// where the full magnitude is nonzero. Returns `(deviation, eps, channel)`.
pub fn max_relative_deviation(full: &[OutputPoint], reduced: &[OutputPoint]) -> Result<(f64, f64, &'static str)> {
    if full.len() != reduced.len() {
        bail!("sweeps have different lengths");
    }
    let mut worst = (0.0, f64::NAN, "none");
    for (p, q) in full.iter().zip(reduced) {
        for (name, x, y) in [("transmitted", p.transmitted, q.transmitted), ("reflected", p.reflected, q.reflected)] {
            if x.norm() == 0.0 {
                continue;
            }
            let dev = (y.norm() - x.norm()).abs() / x.norm();
            if dev > worst.0 {
                worst = (dev, p.eps, name);
            }
        }
    }
    Ok(worst)
}

/// Quasi-principal-component basis from steady states at `lambda` and at zero drive.
pub fn compute_basis(n: usize, d: usize, lambda: f64, cavity: &CavityParams) -> Result<ReductionBasis> {
    if lambda == 0.0 {
        bail!("lambda = 0 gives identical training states (both the vacuum steady state); choose a nonzero drive");
    }
    let f = CavityFactory::full(1, n, cavity)?;
    let rho_l = cavity_steady_state(&f, lambda)?;
    let rho_0 = cavity_steady_state(&f, 0.0)?;
    Ok(build_basis(&rho_l, &rho_0, d, lambda, &JadeOptions::default())?)
}

/// Reduction method compared in fidelity curves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionMethod {
    Jade,
    Fock,
}

impl ReductionMethod {
    pub fn label(&self) -> &'static str {
        match self {
            ReductionMethod::Jade => "jade",
            ReductionMethod::Fock => "fock",
        }
    }
}

/// One point of a fidelity curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityPoint {
    pub eps: f64,
    pub d: usize,
    pub method: ReductionMethod,
    pub fidelity: f64,
}

/// Fidelity of the embedded reduced steady state with the full one.
pub fn reduced_fidelity(
    full_state: &QuantumState,
    basis: &ReductionBasis,
    method: ReductionMethod,
    cavity: &CavityParams,
    eps: f64,
) -> Result<(f64, QuantumState)> {
    let f = CavityFactory::reduced(1, basis, cavity)?;
    let rho_r = cavity_steady_state(&f, eps)?;
    let embedded = match method {
        ReductionMethod::Jade => embed_jade_state(&rho_r, basis)?,
        ReductionMethod::Fock => embed_fock_state(&rho_r, basis.full_dim())?,
    };
    Ok((fidelity(full_state, &embedded)?, embedded))
}

/// Fidelity versus retained dimension for both reduction methods.
pub fn fidelity_curve(
    jade_basis: &ReductionBasis,
    cavity: &CavityParams,
    eps: &[f64],
    d_grid: &[usize],
    methods: &[ReductionMethod],
) -> Result<Vec<FidelityPoint>> {
    let n = jade_basis.full_dim();
    let full = CavityFactory::full(1, n, cavity)?;
    let mut out = Vec::new();
    for &e in eps {
        let rho = cavity_steady_state(&full, e)?;
        for &method in methods {
            for &d in d_grid {
                let basis = match method {
                    ReductionMethod::Jade => jade_basis.with_dim(d)?,
                    ReductionMethod::Fock => fock_truncation_basis(n, d)?,
                };
                let (fidelity, _) = reduced_fidelity(&rho, &basis, method, cavity, e)?;
                log::info!("eps {e:.4} {} d {d}: F = {fidelity:.6}", method.label());
                out.push(FidelityPoint { eps: e, d, method, fidelity });
            }
        }
    }
    Ok(out)
}

/// Reflected (`refl`) and transmitted (`trans`) output observables of [`driven_cavity`].
pub fn output_observables(f: &CavityFactory) -> Result<Vec<Observable>> {
    let g = driven_cavity(f)?;
    Ok(vec![Observable::new("refl", g.l()[0].clone()), Observable::new("trans", g.l()[1].clone())])
}

/// Cavity outputs under the linear drive `eps(t) = slope * t`, `t` in `[0, t_end]`.
pub fn linear_drive_response(
    f: &CavityFactory,
    slope: f64,
    t_end: f64,
    samples: usize,
    method: crate::config::Method,
    traj: &TrajectoryConfig,
) -> Result<ExpectationSeries> {
    let g = driven_cavity(f)?;
    let system = g.to_open_system()?;
    let schedule = DriveSchedule::linear(DRIVE, 0.0, C64::new(0.0, 0.0), t_end, C64::new(slope * t_end, 0.0))?;
    let grid = uniform_grid(0.0, t_end, samples);
    let obs = output_observables(f)?;
    let psi0 = f.initial_state()?;
    Ok(match method {
        crate::config::Method::Master => {
            let rho0 = QuantumState::density(psi0.space().clone(), psi0.to_density())?;
            master_evolve(&rho0, &system, &schedule, &grid, &obs, &EvolveOptions::default())?.series
        }
        crate::config::Method::Mcwf => mcwf_ensemble(&psi0, &system, &schedule, &grid, &obs, traj)?,
    })
}

/// `<a>` observable of cavity 0 as a plain operator.
pub fn lowering_observable(f: &CavityFactory) -> Result<Observable> {
    Ok(Observable::new("a", ParametricOperator::from_operator(f.lowering(0)?.clone())))
}

/// Mean of `series[name]` magnitudes over samples with `t0 <= t < t1`.
pub fn plateau(series: &ExpectationSeries, name: &str, t0: f64, t1: f64) -> Result<f64> {
    let o = series.index(name)?;
    let vals: Vec<f64> = series
        .times
        .iter()
        .zip(&series.mean[o])
        .filter(|(t, _)| **t >= t0 && **t < t1)
        .map(|(_, m)| m.norm())
        .collect();
    if vals.is_empty() {
        bail!("no samples of `{name}` in [{t0}, {t1})");
    }
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(eps: f64, t: f64) -> OutputPoint {
        OutputPoint { eps, reflected: C64::new(t, 0.0), transmitted: C64::new(t, 0.0) }
    }

    #[test]
    fn steepest_rise_finds_the_jump() {
        let pts: Vec<_> = [0.0, 0.1, 0.2, 3.0, 3.1].iter().enumerate().map(|(i, &t)| point(i as f64, t)).collect();
        let (at, slope) = steepest_rise(&pts).unwrap();
        assert_eq!(at, 2.5);
        assert!((slope - 2.8).abs() < 1e-12);
    }

    #[test]
    fn relative_deviation_skips_zero_reference() {
        let full = [point(0.0, 0.0), point(1.0, 2.0)];
        let red = [point(0.0, 0.1), point(1.0, 2.1)];
        let (dev, eps, _) = max_relative_deviation(&full, &red).unwrap();
        assert!((dev - 0.05).abs() < 1e-12);
        assert_eq!(eps, 1.0);
    }

    #[test]
    fn zero_lambda_is_rejected() {
        let err = compute_basis(6, 3, 0.0, &CavityParams::default()).unwrap_err();
        assert!(err.to_string().contains("lambda = 0"));
    }
}
