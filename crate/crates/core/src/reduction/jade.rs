// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Joint approximate diagonalisation by Jacobi rotations.

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Stopping rule for [`jade`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JadeOptions {
    /// A sweep without any rotation of `|sin| > tol` ends the iteration.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for JadeOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_sweeps: 200 }
    }
}

/// Output of [`jade`].
#[derive(Clone, Debug)]
pub struct JadeResult {
    /// Unitary whose columns jointly (approximately) diagonalise the inputs.
    pub t: DMatrix<C64>,
    /// `T^dagger A_k T` for every input.
    pub rotated: Vec<DMatrix<C64>>,
    pub sweeps: usize,
    /// Off-diagonal mass before the first sweep and after every sweep.
    pub off_history: Vec<f64>,
    pub converged: bool,
}

/// `sum_k sum_{i != j} |A_k[i, j]|^2`.
pub fn off(mats: &[DMatrix<C64>]) -> f64 {
    mats.iter()
        .map(|m| {
            let mut s = 0.0;
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    if i != j {
                        s += m[(i, j)].norm_sqr();
                    }
                }
            }
            s
        })
        .sum()
}

/// Finds a unitary `T` minimising the joint off-diagonal mass of `T^dagger A_k T`.
///
/// Each pair `(p, q)` is rotated by the Givens matrix `[[c, -s*], [s, c]]` that
/// maximises the joint diagonal; the angle comes from the dominant eigenvector of a
/// real 3x3 matrix accumulated over the inputs.
pub fn jade(mats: &[DMatrix<C64>], opts: &JadeOptions) -> Result<JadeResult> {
    let Some(first) = mats.first() else {
        return Err(Error::InvalidArgument("jade needs at least one matrix".into()));
    };
    let n = first.nrows();
    for m in mats {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.nrows().max(m.ncols()) });
        }
    }
    let mut a: Vec<DMatrix<C64>> = mats.to_vec();
    let mut v = DMatrix::<C64>::identity(n, n);
    let mut history = vec![off(&a)];
    let i = C64::new(0.0, 1.0);
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                // g = [A_pp - A_qq, A_pq, A_qp] mapped through B = [[1,0,0],[0,1,1],[0,-i,i]].
                let mut gram = Matrix3::<f64>::zeros();
                for m in &a {
                    let g0 = m[(p, p)] - m[(q, q)];
                    let g1 = m[(p, q)] + m[(q, p)];
                    let g2 = -i * m[(p, q)] + i * m[(q, p)];
                    let g = [g0, g1, g2];
                    for r in 0..3 {
                        for c in 0..3 {
                            gram[(r, c)] += (g[r] * g[c].conj()).re;
                        }
                    }
                }
                let eig = gram.symmetric_eigen();
                let k = eig.eigenvalues.imax();
                let mut ang: Vector3<f64> = eig.eigenvectors.column(k).into();
                if ang[0] < 0.0 {
                    ang = -ang;
                }
                let c = (0.5 + ang[0] / 2.0).sqrt();
                let s = C64::new(ang[1], -ang[2]) * (0.5 / c);
                if s.norm() <= opts.tol {
                    continue;
                }
                rotated = true;
                let sc = s.conj();
                for m in a.iter_mut() {
                    for col in 0..n {
                        let (x, y) = (m[(p, col)], m[(q, col)]);
                        m[(p, col)] = x * c + sc * y;
                        m[(q, col)] = -s * x + y * c;
                    }
                    for row in 0..n {
                        let (x, y) = (m[(row, p)], m[(row, q)]);
                        m[(row, p)] = x * c + s * y;
                        m[(row, q)] = -sc * x + y * c;
                    }
                }
                for row in 0..n {
                    let (x, y) = (v[(row, p)], v[(row, q)]);
                    v[(row, p)] = x * c + s * y;
                    v[(row, q)] = -sc * x + y * c;
                }
            }
        }
        history.push(off(&a));
        if !rotated {
            converged = true;
            break;
        }
    }
    Ok(JadeResult { t: v, rotated: a, sweeps, off_history: history, converged })
}
