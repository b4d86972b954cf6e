// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{Operator, QuantumState, SpaceDescriptor, STATE_TOL};
use crate::linalg::{self, ShiftedSolver};

const ZERO: C64 = C64::new(0.0, 0.0);

/// `-i[H, rho] + sum_j (L_j rho L_j^dagger - {L_j^dagger L_j, rho}/2)`.
pub fn lindblad_apply(rho: &DMatrix<C64>, h: &Operator, collapse: &[Operator]) -> Result<DMatrix<C64>> {
    let n = h.dim();
    if rho.nrows() != n || rho.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rho.nrows() });
    }
    let hd = h.to_dense();
    let mut out = (&hd * rho - rho * &hd) * C64::new(0.0, -1.0);
    for l in collapse {
        h.space().check_same(l.space())?;
        let ld = l.to_dense();
        let ldl = ld.adjoint() * &ld;
        out += &ld * rho * ld.adjoint() - (&ldl * rho + rho * &ldl) * C64::new(0.5, 0.0);
    }
    Ok(out)
}

/// Liouvillian superoperator acting on row-major `vec(rho)`, where
/// `vec(A rho B) = (A ⊗ B^T) vec(rho)`.
pub fn liouvillian(h: &Operator, collapse: &[Operator]) -> Result<Operator> {
    let space = h.space();
    let id = Operator::identity(space.clone());
    let mi = C64::new(0.0, -1.0);
    let mut terms: Vec<(C64, Operator)> = vec![(mi, h.tensor(&id)), (-mi, id.tensor(&h.transpose()))];
    for l in collapse {
        space.check_same(l.space())?;
        let ldl = l.dagger().matmul(l)?;
        terms.push((C64::new(1.0, 0.0), l.tensor(&l.conj())));
        terms.push((C64::new(-0.5, 0.0), ldl.tensor(&id)));
        terms.push((C64::new(-0.5, 0.0), id.tensor(&ldl.transpose())));
    }
    let lspace = space.tensor(space);
    let triplets = terms
        .iter()
        .flat_map(|(c, op)| op.triplets().map(move |(r, col, v)| (r, col, c * v)))
        .collect::<Vec<_>>();
    Operator::from_triplets(lspace, triplets)
}

/// Controls for [`steady_state_with`].
#[derive(Clone, Copy, Debug)]
pub struct SteadyStateOptions {
    /// Bound on `||L vec(rho)||_2 / max|L_ij|`.
    pub residual_tol: f64,
    pub max_iterations: usize,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self { residual_tol: 1e-8, max_iterations: 8 }
    }
}

/// Diagnostics of a steady-state solve.
#[derive(Clone, Copy, Debug)]
pub struct SteadyStateReport {
    pub residual: f64,
    pub iterations: usize,
    /// Most negative eigenvalue before clamping (zero when none was negative).
    pub clamped: f64,
}

/// Unique steady state of the Lindbladian with default options.
pub fn steady_state(h: &Operator, collapse: &[Operator]) -> Result<QuantumState> {
    Ok(steady_state_with(h, collapse, &SteadyStateOptions::default())?.0)
}

/// Liouvillian as a dense matrix, same convention as [`liouvillian`].
pub fn liouvillian_dense(h: &DMatrix<C64>, collapse: &[DMatrix<C64>]) -> DMatrix<C64> {
    let n = h.nrows();
    let mut out = DMatrix::zeros(n * n, n * n);
    let mi = C64::new(0.0, -1.0);
    let mut k_eff = h * mi;
    for l in collapse {
        k_eff -= (l.adjoint() * l) * C64::new(0.5, 0.0);
    }
    // K rho + rho K^dagger with K = -iH - (1/2) sum L^dagger L.
    let k_adj = k_eff.adjoint();
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..n {
                out[(row, k * n + j)] += k_eff[(i, k)];
                out[(row, i * n + k)] += k_adj[(k, j)];
            }
        }
    }
    for l in collapse {
        let lc = l.map(|v| v.conj());
        for i in 0..n {
            for k in 0..n {
                let a = l[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    for m in 0..n {
                        out[(i * n + j, k * n + m)] += a * lc[(j, m)];
                    }
                }
            }
        }
    }
    out
}

/// Upper bound on the Liouvillian's (lower, upper) bandwidth.
fn liouvillian_bandwidth(h: &Operator, collapse: &[Operator]) -> (usize, usize) {
    let n = h.dim();
    let mut lo = 0;
    let mut hi = 0;
    for op in std::iter::once(h).chain(collapse.iter()) {
        let (l, u) = op.bandwidth();
        let b = l.max(u);
        lo = lo.max(b * n + b);
        hi = hi.max(b * n + b);
    }
    (lo, hi)
}

enum Generator {
    Sparse(Operator),
    Dense(DMatrix<C64>),
}

impl Generator {
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        match self {
            Generator::Sparse(op) => {
                let mut y = vec![ZERO; x.len()];
                op.apply_add(C64::new(1.0, 0.0), x, &mut y);
                y
            }
            Generator::Dense(m) => (m * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec(),
        }
    }

    fn max_abs(&self) -> f64 {
        match self {
            Generator::Sparse(op) => op.max_abs(),
            Generator::Dense(m) => m.iter().fold(0.0f64, |a, v| a.max(v.norm())),
        }
    }
}

enum Factor {
    Shifted(ShiftedSolver),
    Dense(nalgebra::linalg::LU<C64, nalgebra::Dyn, nalgebra::Dyn>),
}

/// Steady state by shifted inverse iteration on the Liouvillian.
///
/// The shift is tiny compared with the spectral gap, so one or two solves already
/// land on the null vector. Trace is fixed to one, Hermiticity restored and any
/// negative rounding eigenvalues clamped to zero before the residual check.
/// Narrow-band generators use banded LU; generators of rotated (dense) operators
/// are assembled and factored densely.
pub fn steady_state_with(
    h: &Operator,
    collapse: &[Operator],
    opts: &SteadyStateOptions,
) -> Result<(QuantumState, SteadyStateReport)> {
    for l in collapse {
        h.space().check_same(l.space())?;
    }
    let n = h.dim();
    let nn = (n * n) as f64;
    let (kl, ku) = liouvillian_bandwidth(h, collapse);
    let band_cost = 3.0 * nn * kl as f64 * (kl + ku + 1) as f64;
    let banded = band_cost < nn * nn * nn / 3.0;
    let (gen, factor) = if banded {
        let lv = liouvillian(h, collapse)?;
        let shift = C64::new(-1e-10 * lv.max_abs().max(f64::MIN_POSITIVE), 0.0);
        let f = ShiftedSolver::factor(&lv, shift)?;
        (Generator::Sparse(lv), Factor::Shifted(f))
    } else {
        let ls: Vec<DMatrix<C64>> = collapse.iter().map(|l| l.to_dense()).collect();
        let mut m = liouvillian_dense(&h.to_dense(), &ls);
        let gen = Generator::Dense(m.clone());
        let shift = -1e-10 * gen.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..m.nrows() {
            m[(i, i)] += shift;
        }
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(Error::Singular("dense Liouvillian LU has a zero pivot".into()));
        }
        (gen, Factor::Dense(lu))
    };
    let scale = gen.max_abs().max(f64::MIN_POSITIVE);
    let solve = |x: &mut Vec<C64>| match &factor {
        Factor::Shifted(s) => s.solve_in_place(x),
        Factor::Dense(lu) => {
            let mut v = nalgebra::DVector::from_column_slice(x);
            lu.solve_mut(&mut v);
            x.copy_from_slice(v.as_slice());
        }
    };
    let trace = |x: &[C64]| -> C64 { (0..n).map(|i| x[i * n + i]).sum() };
    let mut x = vec![ZERO; n * n];
    for i in 0..n {
        x[i * n + i] = C64::new(1.0 / n as f64, 0.0);
    }
    let mut iterations = 0;
    for it in 0..opts.max_iterations {
        iterations = it + 1;
        let prev = x.clone();
        solve(&mut x);
        let tr = trace(&x);
        if tr.norm() == 0.0 || !tr.norm().is_finite() {
            return Err(Error::Singular("steady-state iterate has zero trace".into()));
        }
        x.iter_mut().for_each(|v| *v /= tr);
        let change = x.iter().zip(&prev).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        if change < 1e-14 {
            break;
        }
    }
    let mut rho = DMatrix::from_row_slice(n, n, &x);
    rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let (values, vectors) = linalg::eigh(&rho);
    let clamped = values[0].min(0.0);
    if clamped < 0.0 {
        let mut scaled = vectors.clone();
        for (k, &lam) in values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(lam.max(0.0));
        }
        rho = scaled * vectors.adjoint();
        rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    }
    let tr = rho.trace();
    rho /= tr;
    let flat: Vec<C64> = rho.transpose().iter().copied().collect();
    let res = gen.apply(&flat);
    let residual = res.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt() / scale;
    if residual > opts.residual_tol {
        return Err(Error::SteadyStateResidual { residual, tol: opts.residual_tol });
    }
    let state = QuantumState::density_with_tol(h.space().clone(), rho, STATE_TOL)?;
    Ok((state, SteadyStateReport { residual, iterations, clamped }))
}

/// Space of row-major vectorised density matrices over `space`.
pub fn liouville_space(space: &SpaceDescriptor) -> SpaceDescriptor {
    space.tensor(space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, kerr_hamiltonian};

    fn driven_cavity(n: usize, eps: f64) -> (Operator, Vec<Operator>) {
        let s = SpaceDescriptor::single(n).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let kappa: f64 = 25.0;
        let h = kerr_hamiltonian(&s, 0, 50.0, -50.0 / 60.0)
            .unwrap()
            .add(&a.sub(&a.dagger()).unwrap().scale(C64::new(0.0, kappa.sqrt() * eps)))
            .unwrap();
        (h, vec![a.scale(C64::new((2.0 * kappa).sqrt(), 0.0))])
    }

    #[test]
    fn liouvillian_matches_direct_application() {
        let (h, ls) = driven_cavity(5, 1.3);
        let lv = liouvillian(&h, &ls).unwrap();
        let n = 5;
        let rho = DMatrix::from_fn(n, n, |i, j| C64::new((i + 2 * j) as f64 * 0.1, i as f64 - j as f64));
        let direct = lindblad_apply(&rho, &h, &ls).unwrap();
        let flat: Vec<C64> = rho.transpose().iter().copied().collect();
        let mut y = vec![ZERO; n * n];
        lv.apply_add(C64::new(1.0, 0.0), &flat, &mut y);
        let via = DMatrix::from_row_slice(n, n, &y);
        assert!((&via - &direct).iter().all(|v| v.norm() < 1e-12));
        let dense = liouvillian_dense(&h.to_dense(), &[ls[0].to_dense()]);
        assert!((dense - lv.to_dense()).iter().all(|v| v.norm() < 1e-12));
        let (lo, hi) = lv.bandwidth();
        assert!(lo <= n + 1 && hi <= n + 1);
    }

    #[test]
    fn undriven_cavity_relaxes_to_vacuum() {
        let (h, ls) = driven_cavity(6, 0.0);
        let rho = steady_state(&h, &ls).unwrap().to_density();
        assert!((rho[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn steady_state_is_annihilated_by_generator() {
        let (h, ls) = driven_cavity(12, 3.0);
        let (st, rep) = steady_state_with(&h, &ls, &SteadyStateOptions::default()).unwrap();
        assert!(rep.residual < 1e-12, "{rep:?}");
        let d = lindblad_apply(&st.to_density(), &h, &ls).unwrap();
        assert!(d.iter().all(|v| v.norm() < 1e-9));
        assert!(st.validity().is_valid(1e-10));
    }

    #[test]
    fn dense_and_banded_paths_agree() {
        // A random unitary rotation makes every operator dense, forcing the dense path.
        let (h, ls) = driven_cavity(6, 1.7);
        let banded = steady_state(&h, &ls).unwrap().to_density();
        let m = DMatrix::from_fn(6, 6, |i, j| C64::new((i * 7 + j * 3) as f64 % 5.0, (i + j) as f64 % 3.0));
        let u = m.qr().q();
        let rot = |op: &Operator| {
            Operator::from_dense(op.space().clone(), &(u.adjoint() * op.to_dense() * &u)).unwrap()
        };
        let dense = steady_state(&rot(&h), &[rot(&ls[0])]).unwrap().to_density();
        let back = &u * dense * u.adjoint();
        assert!((back - banded).iter().all(|v| v.norm() < 1e-10));
    }

    #[test]
    fn weak_linear_drive_gives_coherent_amplitude() {
        // Without the Kerr term the steady state is coherent with <a> = -sqrt(κ) ε / (κ + iΔ).
        let n = 20;
        let s = SpaceDescriptor::single(n).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let (kappa, delta, eps) = (25.0f64, 50.0, 2.0);
        let h = crate::fock::number(&s, 0)
            .unwrap()
            .scale(C64::new(delta, 0.0))
            .add(&a.sub(&a.dagger()).unwrap().scale(C64::new(0.0, kappa.sqrt() * eps)))
            .unwrap();
        let ls = vec![a.scale(C64::new((2.0 * kappa).sqrt(), 0.0))];
        let st = steady_state(&h, &ls).unwrap();
        let mean = st.expect(&a).unwrap();
        let expect = -C64::new(kappa.sqrt() * eps, 0.0) / C64::new(kappa, delta);
        assert!((mean - expect).norm() < 1e-10, "{mean} vs {expect}");
    }
}
