// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::integrator::{Dopri5, Tolerances};
use super::schedule::DriveSchedule;
use super::series::{check_grid, ExpectationSeries, Observable};
use crate::error::{Error, Result};
use crate::fock::{QuantumState, STATE_TOL};
use crate::linalg;
use crate::slh::{DrivenOperator, OpenSystem};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Largest negative eigenvalue tolerated before a density matrix is declared corrupt.
pub const CLAMP_LIMIT: f64 = 1e-6;

/// Options for [`master_evolve`].
#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    pub tol: Tolerances,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { tol: Tolerances::new(1e-8, 1e-10) }
    }
}

/// Result of a deterministic evolution.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub series: ExpectationSeries,
    pub final_state: QuantumState,
}

/// Restores Hermiticity, clamps negative eigenvalues and renormalises the trace.
pub fn sanitize_density(rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let mut r = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let (values, vectors) = linalg::eigh(&r);
    if values[0] < -CLAMP_LIMIT {
        return Err(Error::InvalidState(format!("eigenvalue {:.3e} below clamp limit", values[0])));
    }
    if values[0] < 0.0 {
        let mut scaled = vectors.clone();
        for (k, &lam) in values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(lam.max(0.0));
        }
        r = scaled * vectors.adjoint();
        r = (&r + r.adjoint()) * C64::new(0.5, 0.0);
    }
    let tr = r.trace();
    Ok(r / tr)
}

pub(crate) fn compile_observables(system: &OpenSystem, obs: &[Observable]) -> Result<Vec<DrivenOperator>> {
    obs.iter().map(|o| system.compile_observable(&o.op)).collect()
}

pub(crate) fn breakpoints_between(schedule: &DriveSchedule, t0: f64, t1: f64) -> Vec<f64> {
    let mut b: Vec<f64> = schedule.breakpoints().into_iter().filter(|&t| t > t0 && t < t1).collect();
    b.push(t1);
    b
}

/// Integrates the master equation from `rho0` and records observables on `grid`.
///
/// `grid[0]` is the initial time. The drive schedule's knots are integration
/// breakpoints, so ramps never straddle a step.
pub fn master_evolve(
    rho0: &QuantumState,
    system: &OpenSystem,
    schedule: &DriveSchedule,
    grid: &[f64],
    observables: &[Observable],
    opts: &EvolveOptions,
) -> Result<Evolution> {
    check_grid(grid)?;
    system.space().check_same(rho0.space())?;
    let n = system.dim();
    let sched = schedule.resolve(system.params())?;
    let obs = compile_observables(system, observables)?;
    let eff = system.effective_hamiltonian();
    let collapse = system.collapse();

    let y0: Vec<C64> = rho0.to_density().transpose().iter().copied().collect();
    let mut m_buf = vec![ZERO; n * n];
    let mut y_buf = vec![ZERO; n * n];
    let mut yd_buf = vec![ZERO; n * n];
    let mut rhs = |t: f64, rho: &[C64], d: &mut [C64]| {
        let v = sched.values(t);
        m_buf.iter_mut().for_each(|x| *x = ZERO);
        eff.apply_rows_add(&eff.coefficients(&v), C64::new(0.0, -1.0), rho, &mut m_buf, n);
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = m_buf[i * n + j] + m_buf[j * n + i].conj();
            }
        }
        for l in collapse {
            let c = l.coefficients(&v);
            y_buf.iter_mut().for_each(|x| *x = ZERO);
            l.apply_rows_add(&c, C64::new(1.0, 0.0), rho, &mut y_buf, n);
            for i in 0..n {
                for j in 0..n {
                    yd_buf[i * n + j] = y_buf[j * n + i].conj();
                }
            }
            // rho Hermitian: (L rho)^dagger = rho L^dagger.
            l.apply_rows_add(&c, C64::new(1.0, 0.0), &yd_buf, d, n);
        }
    };

    let mut means = vec![Vec::with_capacity(grid.len()); obs.len()];
    let record = |means: &mut Vec<Vec<C64>>, t: f64, rho: &[C64]| {
        let v = sched.values(t);
        for (o, op) in obs.iter().enumerate() {
            let c = op.coefficients(&v);
            let tr = op.trace_terms_rowmajor(rho);
            means[o].push(c.iter().zip(&tr).map(|(a, b)| a * b).sum());
        }
    };
    record(&mut means, grid[0], &y0);

    let t_end = *grid.last().unwrap();
    let mut stepper = Dopri5::new(grid[0], y0, opts.tol);
    let mut next = 1;
    let mut buf = vec![ZERO; n * n];
    for stop in breakpoints_between(schedule, grid[0], t_end) {
        stepper.restart();
        while stepper.t() < stop {
            stepper.step(&mut rhs, stop)?;
            while next < grid.len() && grid[next] <= stepper.t() {
                stepper.dense(grid[next], &mut buf);
                record(&mut means, grid[next], &buf);
                next += 1;
            }
        }
    }
    log::debug!("master_evolve: {} accepted, {} rejected steps", stepper.accepted, stepper.rejected);
    let rho = sanitize_density(&DMatrix::from_row_slice(n, n, stepper.y()))?;
    let final_state = QuantumState::density_with_tol(system.space().clone(), rho, STATE_TOL)?;
    let series = ExpectationSeries {
        times: grid.to_vec(),
        names: observables.iter().map(|o| o.name.clone()).collect(),
        stderr: vec![vec![0.0; grid.len()]; obs.len()],
        mean: means,
        samples: 1,
    };
    Ok(Evolution { series, final_state })
}
