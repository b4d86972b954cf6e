// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::cell::Cell;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::integrator::{Dopri5, Tolerances};
use super::master::{breakpoints_between, compile_observables};
use super::schedule::{DriveSchedule, ResolvedSchedule};
use super::series::{check_grid, ExpectationSeries, Observable};
use crate::error::{Error, Result};
use crate::fock::QuantumState;
use crate::slh::{DrivenOperator, OpenSystem};

const ZERO: C64 = C64::new(0.0, 0.0);
/// Energy drift after which the phase offset of a trajectory is re-centred.
const OFFSET_DRIFT: f64 = 5.0;

/// Ensemble size, master seed and integrator tolerances for [`mcwf_ensemble`].
#[derive(Clone, Copy, Debug)]
pub struct TrajectoryConfig {
    pub trajectories: usize,
    /// Trajectory `j` draws from a ChaCha8 stream `j` keyed by this seed.
    pub seed: u64,
    pub tol: Tolerances,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self { trajectories: 100, seed: 0, tol: Tolerances::new(1e-6, 1e-8) }
    }
}

/// Random stream of trajectory `index`; independent of thread scheduling.
pub fn trajectory_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let r: f64 = rng.random();
        if r > 0.0 {
            return r;
        }
    }
}

struct Problem<'a> {
    n: usize,
    sched: ResolvedSchedule,
    eff: &'a DrivenOperator,
    collapse: &'a [DrivenOperator],
    obs: Vec<DrivenOperator>,
    schedule: &'a DriveSchedule,
    grid: &'a [f64],
    tol: Tolerances,
}

impl Problem<'_> {
    fn record(&self, out: &mut [Vec<C64>], t: f64, psi: &[C64]) {
        let v = self.sched.values(t);
        let norm2: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
        for (o, op) in self.obs.iter().enumerate() {
            let c = op.coefficients(&v);
            let s: C64 = c.iter().zip(op.sandwich_terms(psi)).map(|(a, b)| a * b).sum();
            out[o].push(s / norm2);
        }
    }

    /// Mean energy `Re <psi|H_eff|psi> / <psi|psi>` at `t`.
    fn energy(&self, t: f64, psi: &[C64]) -> f64 {
        let v = self.sched.values(t);
        let norm2: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
        let e: C64 = self.eff.coefficients(&v).iter().zip(self.eff.sandwich_terms(psi)).map(|(a, b)| a * b).sum();
        e.re / norm2
    }

    /// One quantum trajectory; returns `[observable][time]` values.
    ///
    /// The no-jump equation is integrated with `H_eff - E` where `E` is the mean energy
    /// at the last restart. The offset only rotates the global phase, which neither the
    /// recorded means nor the jump statistics see.
    fn run(&self, psi0: &[C64], mut rng: ChaCha8Rng) -> Result<Vec<Vec<C64>>> {
        let n = self.n;
        let grid = self.grid;
        let offset = Cell::new(self.energy(grid[0], psi0));
        let mut rhs = |t: f64, y: &[C64], d: &mut [C64]| {
            let v = self.sched.values(t);
            let e = C64::new(0.0, offset.get());
            for (x, yi) in d.iter_mut().zip(y) {
                *x = e * yi;
            }
            self.eff.apply_add(&self.eff.coefficients(&v), C64::new(0.0, -1.0), y, d);
        };
        let mut out = vec![Vec::with_capacity(grid.len()); self.obs.len()];
        self.record(&mut out, grid[0], psi0);
        let mut stepper = Dopri5::new(grid[0], psi0.to_vec(), self.tol);
        let mut threshold = open_unit(&mut rng);
        let mut next = 1;
        let mut buf = vec![ZERO; n];
        let t_end = *grid.last().unwrap();
        let norm2 = |y: &[C64]| -> f64 { y.iter().map(|x| x.norm_sqr()).sum() };
        for stop in breakpoints_between(self.schedule, grid[0], t_end) {
            offset.set(self.energy(stepper.t(), stepper.y()));
            stepper.restart();
            while stepper.t() < stop {
                stepper.step(&mut rhs, stop)?;
                let p = norm2(stepper.y());
                if p > threshold {
                    while next < grid.len() && grid[next] <= stepper.t() {
                        stepper.dense(grid[next], &mut buf);
                        self.record(&mut out, grid[next], &buf);
                        next += 1;
                    }
                    let e = self.energy(stepper.t(), stepper.y());
                    if (e - offset.get()).abs() > OFFSET_DRIFT {
                        offset.set(e);
                        stepper.restart();
                    }
                    continue;
                }
                if p < 1e-300 {
                    return Err(Error::NormUnderflow(stepper.t()));
                }
                // Locate the threshold crossing on the interpolant (Illinois regula falsi).
                let (mut a, mut b) = (stepper.t_old(), stepper.t());
                stepper.dense(a, &mut buf);
                let mut fa = norm2(&buf) - threshold;
                let mut fb = p - threshold;
                let mut side = 0i8;
                let mut tau = b;
                for _ in 0..100 {
                    tau = (a * fb - b * fa) / (fb - fa);
                    if !(tau > a && tau < b) {
                        tau = 0.5 * (a + b);
                    }
                    stepper.dense(tau, &mut buf);
                    let ft = norm2(&buf) - threshold;
                    if ft.abs() <= 1e-12 * threshold || (b - a) <= 1e-14 * b.abs().max(1.0) {
                        break;
                    }
                    if (ft > 0.0) == (fa > 0.0) {
                        a = tau;
                        fa = ft;
                        if side == 1 {
                            fb *= 0.5;
                        }
                        side = 1;
                    } else {
                        b = tau;
                        fb = ft;
                        if side == -1 {
                            fa *= 0.5;
                        }
                        side = -1;
                    }
                }
                while next < grid.len() && grid[next] <= tau {
                    let mut g = vec![ZERO; n];
                    stepper.dense(grid[next], &mut g);
                    self.record(&mut out, grid[next], &g);
                    next += 1;
                }
                stepper.dense(tau, &mut buf);
                let v = self.sched.values(tau);
                let mut cands: Vec<(f64, Vec<C64>)> = Vec::with_capacity(self.collapse.len());
                for l in self.collapse {
                    let mut phi = vec![ZERO; n];
                    l.apply_add(&l.coefficients(&v), C64::new(1.0, 0.0), &buf, &mut phi);
                    cands.push((norm2(&phi), phi));
                }
                let total: f64 = cands.iter().map(|c| c.0).sum();
                if !(total > 0.0) {
                    return Err(Error::InvalidState(format!("no jump channel is active at t = {tau}")));
                }
                let mut pick = rng.random::<f64>() * total;
                let mut chosen = cands.len() - 1;
                for (j, c) in cands.iter().enumerate() {
                    if pick < c.0 {
                        chosen = j;
                        break;
                    }
                    pick -= c.0;
                }
                let (w, mut phi) = cands.swap_remove(chosen);
                let s = 1.0 / w.sqrt();
                phi.iter_mut().for_each(|x| *x *= s);
                offset.set(self.energy(tau, &phi));
                stepper.reset(tau, &phi);
                threshold = open_unit(&mut rng);
            }
        }
        log::debug!("trajectory: {} steps accepted, {} rejected", stepper.accepted, stepper.rejected);
        Ok(out)
    }
}

/// Monte Carlo wave-function ensemble average of `observables` on `grid`.
///
/// Jumps happen when the squared norm of the unnormalised no-jump state falls to a
/// uniform random threshold; the crossing time is located on the dense-output
/// interpolant. Trajectories run in parallel and are reduced in index order, so
/// results depend only on the seed.
pub fn mcwf_ensemble(
    psi0: &QuantumState,
    system: &OpenSystem,
    schedule: &DriveSchedule,
    grid: &[f64],
    observables: &[Observable],
    cfg: &TrajectoryConfig,
) -> Result<ExpectationSeries> {
    check_grid(grid)?;
    system.space().check_same(psi0.space())?;
    let psi = psi0
        .as_pure()
        .ok_or_else(|| Error::InvalidState("trajectories need a pure initial state".into()))?;
    if cfg.trajectories == 0 {
        return Err(Error::InvalidArgument("at least one trajectory is required".into()));
    }
    let problem = Problem {
        n: system.dim(),
        sched: schedule.resolve(system.params())?,
        eff: system.effective_hamiltonian(),
        collapse: system.collapse(),
        obs: compile_observables(system, observables)?,
        schedule,
        grid,
        tol: cfg.tol,
    };
    let runs: Vec<Vec<Vec<C64>>> = (0..cfg.trajectories)
        .into_par_iter()
        .map(|j| problem.run(psi.as_slice(), trajectory_rng(cfg.seed, j)))
        .collect::<Result<_>>()?;
    let m = runs.len() as f64;
    let (n_obs, n_t) = (observables.len(), grid.len());
    let mut mean = vec![vec![ZERO; n_t]; n_obs];
    let mut stderr = vec![vec![0.0; n_t]; n_obs];
    for run in &runs {
        for o in 0..n_obs {
            for t in 0..n_t {
                mean[o][t] += run[o][t];
            }
        }
    }
    mean.iter_mut().flatten().for_each(|x| *x /= m);
    if runs.len() > 1 {
        for run in &runs {
            for o in 0..n_obs {
                for t in 0..n_t {
                    stderr[o][t] += (run[o][t] - mean[o][t]).norm_sqr();
                }
            }
        }
        stderr.iter_mut().flatten().for_each(|x| *x = (*x / (m * (m - 1.0))).sqrt());
    }
    Ok(ExpectationSeries {
        times: grid.to_vec(),
        names: observables.iter().map(|o| o.name.clone()).collect(),
        mean,
        stderr,
        samples: runs.len(),
    })
}
