// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Drive schedules, Lindblad generators, steady states, master-equation integration
//! and Monte Carlo wave-function ensembles.
//!
//! Vectorised density matrices are row-major: `vec(rho)[i * n + j] = rho[i][j]`.

mod integrator;
mod lindblad;
mod master;
mod mcwf;
mod schedule;
mod series;

pub use integrator::Tolerances;
pub use lindblad::{
    lindblad_apply, liouville_space, liouvillian, steady_state, steady_state_with, SteadyStateOptions,
    SteadyStateReport,
};
pub use master::{master_evolve, sanitize_density, EvolveOptions, Evolution, CLAMP_LIMIT};
pub use mcwf::{mcwf_ensemble, trajectory_rng, TrajectoryConfig};
pub use schedule::{DriveSchedule, ResolvedSchedule, Segment};
pub use series::{output_mean, ExpectationSeries, Observable};

/// `n` evenly spaced points from `t0` to `t1` inclusive.
pub fn uniform_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![t0];
    }
    (0..n).map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, QuantumState, SpaceDescriptor};
    use crate::slh::{drives, kerr_cavity, displacement, identity_network, DriveExpr, ParametricOperator};
    use num_complex::Complex64 as C64;

    fn driven(n: usize) -> (crate::slh::SlhTriple, crate::fock::Operator) {
        let s = SpaceDescriptor::single(n).unwrap();
        let k = kerr_cavity(&s, 0, 25.0, 50.0, -50.0 / 60.0).unwrap();
        let d = displacement(&s, DriveExpr::drive("eps")).unwrap().concat(&identity_network(&s, 1).unwrap()).unwrap();
        (k.series(&d).unwrap(), annihilation(&s, 0).unwrap())
    }

    #[test]
    fn long_time_evolution_reaches_steady_state() {
        let (g, a) = driven(8);
        let sys = g.to_open_system().unwrap();
        let dr = drives([("eps", C64::new(2.0, 0.0))]);
        let sched = DriveSchedule::constant(&dr, 0.0, 2.0).unwrap();
        let vac = QuantumState::vacuum(g.space().clone());
        let rho0 = QuantumState::density(g.space().clone(), vac.to_density()).unwrap();
        let obs = [Observable::new("a", ParametricOperator::from_operator(a))];
        let ev = master_evolve(&rho0, &sys, &sched, &uniform_grid(0.0, 2.0, 21), &obs, &EvolveOptions::default()).unwrap();
        let (h, ls) = sys.evaluate(&dr).unwrap();
        let ss = steady_state(&h, &ls).unwrap();
        let diff = ev.final_state.to_density() - ss.to_density();
        assert!(diff.iter().all(|v| v.norm() < 1e-7));
        assert!(ev.final_state.validity().is_valid(1e-10));
    }

    #[test]
    fn ensemble_is_reproducible_and_tracks_master_equation() {
        let (g, a) = driven(6);
        let sys = g.to_open_system().unwrap();
        let dr = drives([("eps", C64::new(1.5, 0.0))]);
        let sched = DriveSchedule::constant(&dr, 0.0, 0.5).unwrap();
        let grid = uniform_grid(0.0, 0.5, 11);
        let vac = QuantumState::vacuum(g.space().clone());
        let obs = [Observable::new("a", ParametricOperator::from_operator(a))];
        let cfg = TrajectoryConfig { trajectories: 200, seed: 7, ..Default::default() };
        let e1 = mcwf_ensemble(&vac, &sys, &sched, &grid, &obs, &cfg).unwrap();
        let e2 = mcwf_ensemble(&vac, &sys, &sched, &grid, &obs, &cfg).unwrap();
        assert_eq!(e1, e2);
        let rho0 = QuantumState::density(g.space().clone(), vac.to_density()).unwrap();
        let me = master_evolve(&rho0, &sys, &sched, &grid, &obs, &EvolveOptions::default()).unwrap();
        for t in 0..grid.len() {
            let dev = (e1.mean[0][t] - me.series.mean[0][t]).norm();
            assert!(dev <= 4.0 * e1.stderr[0][t] + 1e-4, "t={} dev={dev}", grid[t]);
        }
    }
}
