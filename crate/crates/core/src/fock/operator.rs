// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::SpaceDescriptor;
use crate::error::{Error, Result};
use crate::linalg;

/// Sparse complex operator in compressed-row storage.
///
/// Invariants: `indptr.len() == dim + 1`, column indices strictly increasing within a
/// row, no explicitly stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    space: SpaceDescriptor,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl Operator {
    /// Builds an operator from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets<I>(space: SpaceDescriptor, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let n = space.total_dim();
        let mut t: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        for &(r, c, _) in &t {
            if r >= n || c >= n {
                return Err(Error::DimensionMismatch { expected: n, found: r.max(c) + 1 });
            }
        }
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<C64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                rows.push(r);
                last = Some((r, c));
            }
        }
        let mut keep_idx = Vec::with_capacity(indices.len());
        let mut keep_val = Vec::with_capacity(values.len());
        for ((r, c), v) in rows.into_iter().zip(indices).zip(values) {
            if v != C64::new(0.0, 0.0) {
                indptr[r + 1] += 1;
                keep_idx.push(c);
                keep_val.push(v);
            }
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        Ok(Self { space, indptr, indices: keep_idx, values: keep_val })
    }

    pub fn zeros(space: SpaceDescriptor) -> Self {
        let n = space.total_dim();
        Self { space, indptr: vec![0; n + 1], indices: vec![], values: vec![] }
    }

    pub fn identity(space: SpaceDescriptor) -> Self {
        let n = space.total_dim();
        Self::diagonal(space, &vec![C64::new(1.0, 0.0); n]).expect("length matches")
    }

    /// Diagonal operator; `diag.len()` must equal the space dimension.
    pub fn diagonal(space: SpaceDescriptor, diag: &[C64]) -> Result<Self> {
        let n = space.total_dim();
        if diag.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: diag.len() });
        }
        Self::from_triplets(space, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Sparse copy of a dense matrix; exact zeros are dropped.
    pub fn from_dense(space: SpaceDescriptor, m: &DMatrix<C64>) -> Result<Self> {
        let n = space.total_dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.nrows().max(m.ncols()) });
        }
        let mut t = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let v = m[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    t.push((r, c, v));
                }
            }
        }
        Self::from_triplets(space, t)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim()).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k]))
        })
    }

    /// Entries of row `r` as `(col, value)`.
    #[inline]
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        self.indices[a..b].iter().copied().zip(self.values[a..b].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        match self.indices[a..b].binary_search(&c) {
            Ok(k) => self.values[a + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_triplets(self.space.clone(), self.triplets().map(|(r, c, v)| (c, r, v.conj())))
            .expect("same space")
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.space.clone(), self.triplets().map(|(r, c, v)| (c, r, v)))
            .expect("same space")
    }

    /// Elementwise complex conjugate.
    pub fn conj(&self) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = v.conj());
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        if c == C64::new(0.0, 0.0) {
            return Self::zeros(self.space.clone());
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &Operator, c: C64) -> Result<Self> {
        self.space.check_same(&other.space)?;
        let t = self.triplets().chain(other.triplets().map(|(r, col, v)| (r, col, c * v)));
        Self::from_triplets(self.space.clone(), t)
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.add_scaled(other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Operator) -> Result<Self> {
        self.add_scaled(other, C64::new(-1.0, 0.0))
    }

    /// Operator product `self * other`.
    pub fn matmul(&self, other: &Operator) -> Result<Self> {
        self.space.check_same(&other.space)?;
        let n = self.dim();
        let mut acc = vec![C64::new(0.0, 0.0); n];
        let mut mark = vec![usize::MAX; n];
        let mut cols: Vec<usize> = Vec::new();
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for r in 0..n {
            cols.clear();
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = C64::new(0.0, 0.0);
                        cols.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            cols.sort_unstable();
            for &c in &cols {
                if acc[c] != C64::new(0.0, 0.0) {
                    indices.push(c);
                    values.push(acc[c]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        Ok(Self { space: self.space.clone(), indptr, indices, values })
    }

    /// Kronecker product on the concatenated space `self.space ⊗ other.space`.
    pub fn tensor(&self, other: &Operator) -> Self {
        let m = other.dim();
        let space = self.space.tensor(&other.space);
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in self.triplets() {
            for (r2, c2, v2) in other.triplets() {
                t.push((r1 * m + r2, c1 * m + c2, v1 * v2));
            }
        }
        Self::from_triplets(space, t).expect("indices in range")
    }

    /// Lifts a single-mode operator to act on `mode` of `space`, identity elsewhere.
    pub fn embed(space: &SpaceDescriptor, mode: usize, op: &Operator) -> Result<Self> {
        space.check_mode(mode)?;
        if op.dim() != space.mode_dims()[mode] {
            return Err(Error::DimensionMismatch {
                expected: space.mode_dims()[mode],
                found: op.dim(),
            });
        }
        let stride = space.stride(mode);
        let outer = space.total_dim() / (stride * op.dim());
        let dm = op.dim();
        let mut t = Vec::with_capacity(outer * stride * op.nnz());
        for o in 0..outer {
            for (r, c, v) in op.triplets() {
                for i in 0..stride {
                    t.push((o * dm * stride + r * stride + i, o * dm * stride + c * stride + i, v));
                }
            }
        }
        Self::from_triplets(space.clone(), t)
    }

    /// `y += alpha * A x`.
    #[inline]
    pub fn apply_add(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        for (r, yr) in y.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for (c, v) in self.row(r) {
                s += v * x[c];
            }
            *yr += alpha * s;
        }
    }

    /// `Y += alpha * A X` for a row-major `n x m` block `X`.
    pub fn apply_rows_add(&self, alpha: C64, x: &[C64], y: &mut [C64], m: usize) {
        let n = self.dim();
        debug_assert_eq!(x.len(), n * m);
        debug_assert_eq!(y.len(), n * m);
        for r in 0..n {
            let yr = &mut y[r * m..(r + 1) * m];
            for (c, v) in self.row(r) {
                let a = alpha * v;
                let xc = &x[c * m..(c + 1) * m];
                for (yi, xi) in yr.iter_mut().zip(xc) {
                    *yi += a * xi;
                }
            }
        }
    }

    /// `<x| A |x>` without normalisation.
    pub fn sandwich(&self, x: &[C64]) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for r in 0..self.dim() {
            let mut row = C64::new(0.0, 0.0);
            for (c, v) in self.row(r) {
                row += v * x[c];
            }
            s += x[r].conj() * row;
        }
        s
    }

    /// `Tr(A rho)` for a row-major flattened `rho`.
    pub fn trace_with_rowmajor(&self, rho: &[C64]) -> C64 {
        let n = self.dim();
        let mut s = C64::new(0.0, 0.0);
        for r in 0..n {
            for (c, v) in self.row(r) {
                s += v * rho[c * n + r];
            }
        }
        s
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Largest entry of `|A - A^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut d = 0.0f64;
        for (r, c, v) in self.triplets() {
            d = d.max((v - self.get(c, r).conj()).norm());
        }
        d
    }

    /// Spectral norm via a dense singular value decomposition.
    pub fn op_norm(&self) -> f64 {
        linalg::spectral_norm(&self.to_dense())
    }

    /// Lower and upper bandwidth.
    pub fn bandwidth(&self) -> (usize, usize) {
        let (mut lo, mut hi) = (0, 0);
        for (r, c, _) in self.triplets() {
            if r > c {
                lo = lo.max(r - c);
            } else {
                hi = hi.max(c - r);
            }
        }
        (lo, hi)
    }

    /// Commutator `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }
}

/// Annihilation operator of `mode`: `a|n> = sqrt(n)|n-1>`.
pub fn annihilation(space: &SpaceDescriptor, mode: usize) -> Result<Operator> {
    space.check_mode(mode)?;
    let d = space.mode_dims()[mode];
    let single = SpaceDescriptor::single(d)?;
    let a = Operator::from_triplets(
        single,
        (1..d).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))),
    )?;
    Operator::embed(space, mode, &a)
}

pub fn creation(space: &SpaceDescriptor, mode: usize) -> Result<Operator> {
    Ok(annihilation(space, mode)?.dagger())
}

/// Number operator `a^dagger a` of `mode`.
pub fn number(space: &SpaceDescriptor, mode: usize) -> Result<Operator> {
    space.check_mode(mode)?;
    let d = space.mode_dims()[mode];
    let single = SpaceDescriptor::single(d)?;
    let diag: Vec<C64> = (0..d).map(|n| C64::new(n as f64, 0.0)).collect();
    Operator::embed(space, mode, &Operator::diagonal(single, &diag)?)
}

/// Kerr Hamiltonian `delta a^dagger a + chi a^dagger a^dagger a a`, diagonal with
/// entries `delta n + chi n (n - 1)`.
pub fn kerr_hamiltonian(space: &SpaceDescriptor, mode: usize, delta: f64, chi: f64) -> Result<Operator> {
    space.check_mode(mode)?;
    let d = space.mode_dims()[mode];
    let single = SpaceDescriptor::single(d)?;
    let diag: Vec<C64> = (0..d)
        .map(|n| {
            let n = n as f64;
            C64::new(delta * n + chi * n * (n - 1.0), 0.0)
        })
        .collect();
    Operator::embed(space, mode, &Operator::diagonal(single, &diag)?)
}

/// Eigen-decomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: DMatrix<C64>,
}

/// Hermitian eigen-decomposition; rejects inputs with Hermiticity defect above `tol`.
pub fn hermitian_eig(x: &Operator, tol: f64) -> Result<HermitianEig> {
    let defect = x.hermiticity_defect();
    if defect > tol {
        return Err(Error::NotHermitian { defect, tol });
    }
    let (values, vectors) = linalg::eigh(&x.to_dense());
    Ok(HermitianEig { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn ladder_action_on_fock_states() {
        let s = SpaceDescriptor::single(6).unwrap();
        let a = annihilation(&s, 0).unwrap();
        for n in 1..6 {
            assert!((a.get(n - 1, n) - c((n as f64).sqrt())).norm() < 1e-15);
        }
        assert_eq!(a.nnz(), 5);
        let ad = creation(&s, 0).unwrap();
        let num = ad.matmul(&a).unwrap();
        assert!(num.sub(&number(&s, 0).unwrap()).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn kerr_diagonal_matches_formula() {
        let s = SpaceDescriptor::single(8).unwrap();
        let h = kerr_hamiltonian(&s, 0, 50.0, -50.0 / 60.0).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let ad = a.dagger();
        let n = ad.matmul(&a).unwrap();
        let nn = ad.matmul(&ad).unwrap().matmul(&a).unwrap().matmul(&a).unwrap();
        let expect = n.scale(c(50.0)).add_scaled(&nn, c(-50.0 / 60.0)).unwrap();
        assert!(h.sub(&expect).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn embedding_commutes_across_modes() {
        let s = SpaceDescriptor::new(vec![3, 4]).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let b = annihilation(&s, 1).unwrap();
        assert_eq!(a.commutator(&b).unwrap().nnz(), 0);
        assert_eq!(a.commutator(&b.dagger()).unwrap().nnz(), 0);
        let single3 = annihilation(&SpaceDescriptor::single(3).unwrap(), 0).unwrap();
        let id4 = Operator::identity(SpaceDescriptor::single(4).unwrap());
        assert_eq!(single3.tensor(&id4), a);
    }

    #[test]
    fn truncated_commutator_defect_only_in_top_level() {
        let s = SpaceDescriptor::single(5).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let comm = a.commutator(&a.dagger()).unwrap();
        for n in 0..4 {
            assert!((comm.get(n, n) - c(1.0)).norm() < 1e-14);
        }
        assert!((comm.get(4, 4) - c(-4.0)).norm() < 1e-14);
    }

    #[test]
    fn hermitian_eig_rejects_non_hermitian() {
        let s = SpaceDescriptor::single(4).unwrap();
        let a = annihilation(&s, 0).unwrap();
        assert!(matches!(hermitian_eig(&a, 1e-10), Err(Error::NotHermitian { .. })));
        let x = a.add(&a.dagger()).unwrap();
        let e = hermitian_eig(&x, 1e-10).unwrap();
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    fn arb_op(n: usize) -> impl Strategy<Value = Operator> {
        proptest::collection::vec((0..n, 0..n, -1.0f64..1.0, -1.0f64..1.0), 0..3 * n).prop_map(
            move |t| {
                Operator::from_triplets(
                    SpaceDescriptor::single(n).unwrap(),
                    t.into_iter().map(|(r, c, x, y)| (r, c, C64::new(x, y))),
                )
                .unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn dagger_is_an_involution(a in arb_op(6)) {
            prop_assert_eq!(a.dagger().dagger(), a);
        }

        #[test]
        fn matmul_agrees_with_dense(a in arb_op(5), b in arb_op(5)) {
            let sparse = a.matmul(&b).unwrap().to_dense();
            let dense = a.to_dense() * b.to_dense();
            prop_assert!((sparse - dense).iter().all(|v| v.norm() < 1e-12));
        }

        #[test]
        fn product_adjoint_reverses_order(a in arb_op(5), b in arb_op(5)) {
            let lhs = a.matmul(&b).unwrap().dagger();
            let rhs = b.dagger().matmul(&a.dagger()).unwrap();
            prop_assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
        }

        #[test]
        fn apply_matches_dense(a in arb_op(6), x in proptest::collection::vec(-1.0f64..1.0, 12)) {
            let v: Vec<C64> = x.chunks(2).map(|p| C64::new(p[0], p[1])).collect();
            let mut y = vec![C64::new(0.0, 0.0); 6];
            a.apply_add(C64::new(1.0, 0.0), &v, &mut y);
            let dense = a.to_dense() * nalgebra::DVector::from_vec(v.clone());
            prop_assert!(y.iter().zip(dense.iter()).all(|(p, q)| (p - q).norm() < 1e-12));
        }
    }
}
