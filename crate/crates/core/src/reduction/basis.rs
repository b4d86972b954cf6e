// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::jade::{jade, JadeOptions};
use crate::error::{Error, Result};
use crate::fock::{self, read_matrix, write_matrix, MatrixStorage, Operator, QuantumState, SpaceDescriptor};

/// Which block of the ordered basis is retained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockConvention {
    /// Last `d` columns after sorting by ascending weight (quasi-principal components).
    Last,
    /// First `d` columns (plain Fock truncation with `T = I`).
    First,
}

impl BlockConvention {
    fn as_str(&self) -> &'static str {
        match self {
            BlockConvention::Last => "last",
            BlockConvention::First => "first",
        }
    }
}

/// Orthonormal basis of a single mode with a retained block of `d` vectors.
///
/// Invariants: `t` is `N x N` unitary, `weights` (when present) are ascending and
/// aligned with the columns of `t`, `1 <= d <= N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionBasis {
    pub t: DMatrix<C64>,
    pub d: usize,
    /// Drive amplitude of the high-excitation training state (0 for Fock truncation).
    pub lambda: f64,
    /// `|diag(T^dagger (rho_lambda + rho_0) T)|`, ascending; empty for Fock truncation.
    pub weights: Vec<f64>,
    pub convention: BlockConvention,
    /// Hash of the run manifest that produced the basis, if any.
    pub manifest_hash: Option<String>,
}

impl ReductionBasis {
    pub fn full_dim(&self) -> usize {
        self.t.nrows()
    }

    /// `N x d` isometry `V = T P^T` onto the retained block.
    pub fn isometry(&self) -> DMatrix<C64> {
        let n = self.full_dim();
        let start = match self.convention {
            BlockConvention::Last => n - self.d,
            BlockConvention::First => 0,
        };
        self.t.columns(start, self.d).into_owned()
    }

    /// Space of the reduced mode.
    pub fn reduced_space(&self) -> SpaceDescriptor {
        SpaceDescriptor::single(self.d).expect("d >= 1")
    }

    /// Same basis with a different retained dimension.
    pub fn with_dim(&self, d: usize) -> Result<Self> {
        check_dim(d, self.full_dim())?;
        Ok(Self { d, ..self.clone() })
    }

    /// `V rho_r V^dagger`: reduced state lifted back to the full space.
    pub fn embed_state(&self, rho_r: &QuantumState) -> Result<QuantumState> {
        if rho_r.space().total_dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: rho_r.space().total_dim() });
        }
        let v = self.isometry();
        let full = &v * rho_r.to_density() * v.adjoint();
        QuantumState::density(SpaceDescriptor::single(self.full_dim())?, full)
    }

    /// Writes the basis: header lines, weights, then `T` in dense matrix format.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "kerrnet-basis v1")?;
        writeln!(w, "N {}", self.full_dim())?;
        writeln!(w, "d {}", self.d)?;
        writeln!(w, "lambda {:?}", self.lambda)?;
        writeln!(w, "convention {}", self.convention.as_str())?;
        writeln!(w, "manifest {}", self.manifest_hash.as_deref().unwrap_or("-"))?;
        let ws: Vec<String> = self.weights.iter().map(|x| format!("{x:?}")).collect();
        writeln!(w, "weights {}", ws.join(" "))?;
        let op = Operator::from_dense(SpaceDescriptor::single(self.full_dim())?, &self.t)?;
        write_matrix(w, &op, MatrixStorage::Dense)
    }

    /// Reads a basis written by [`Self::write`], re-checking its invariants.
    pub fn read<R: BufRead>(mut r: R) -> Result<Self> {
        let mut line_no = 0;
        let mut field = |key: &str| -> Result<String> {
            let mut l = String::new();
            r.read_line(&mut l)?;
            line_no += 1;
            let l = l.trim_end_matches(['\n', '\r']);
            if key.is_empty() {
                return Ok(l.to_string());
            }
            l.strip_prefix(key)
                .and_then(|rest| rest.strip_prefix(' ').or(if rest.is_empty() { Some("") } else { None }))
                .map(str::to_string)
                .ok_or_else(|| Error::Parse { line: line_no, msg: format!("expected `{key}`") })
        };
        let perr = |msg: String| Error::Parse { line: 0, msg };
        if field("")? != "kerrnet-basis v1" {
            return Err(perr("not a basis file".into()));
        }
        let n: usize = field("N")?.parse().map_err(|e| perr(format!("N: {e}")))?;
        let d: usize = field("d")?.parse().map_err(|e| perr(format!("d: {e}")))?;
        let lambda: f64 = field("lambda")?.parse().map_err(|e| perr(format!("lambda: {e}")))?;
        let convention = match field("convention")?.as_str() {
            "last" => BlockConvention::Last,
            "first" => BlockConvention::First,
            other => return Err(perr(format!("unknown convention `{other}`"))),
        };
        let manifest = field("manifest")?;
        let manifest_hash = if manifest == "-" { None } else { Some(manifest) };
        let weights: Vec<f64> = field("weights")?
            .split_whitespace()
            .map(|t| t.parse().map_err(|e| perr(format!("weight: {e}"))))
            .collect::<Result<_>>()?;
        let t = read_matrix(r)?.to_dense();
        if t.nrows() != n {
            return Err(Error::InvalidBasis(format!("header says N = {n}, matrix has {}", t.nrows())));
        }
        check_dim(d, n)?;
        let basis = Self { t, d, lambda, weights, convention, manifest_hash };
        basis.validate()?;
        Ok(basis)
    }

    /// Checks unitarity of `T` and ordering of the weights.
    pub fn validate(&self) -> Result<()> {
        let n = self.full_dim();
        let defect = (self.t.adjoint() * &self.t - DMatrix::<C64>::identity(n, n))
            .iter()
            .fold(0.0f64, |m, v| m.max(v.norm()));
        if defect > 1e-10 {
            return Err(Error::InvalidBasis(format!("T is not unitary (defect {defect:.3e})")));
        }
        if !self.weights.is_empty() && self.weights.len() != n {
            return Err(Error::InvalidBasis("weights do not match N".into()));
        }
        if self.weights.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidBasis("weights are not ascending".into()));
        }
        Ok(())
    }
}

fn check_dim(d: usize, n: usize) -> Result<()> {
    if d == 0 || d > n {
        return Err(Error::InvalidArgument(format!("reduced dimension {d} must lie in 1..={n}")));
    }
    Ok(())
}

/// Quasi-principal-component basis from a driven and an undriven steady state.
///
/// The two density matrices are jointly diagonalised, the joint eigenvectors ordered
/// by ascending weight in `rho_lambda + rho_0`, and the last `d` retained.
pub fn build_basis(
    rho_lambda: &QuantumState,
    rho_0: &QuantumState,
    d: usize,
    lambda: f64,
    opts: &JadeOptions,
) -> Result<ReductionBasis> {
    if lambda == 0.0 {
        return Err(Error::InvalidArgument(
            "lambda = 0 makes both training states the vacuum; the basis is degenerate".into(),
        ));
    }
    rho_lambda.space().check_same(rho_0.space())?;
    if rho_lambda.space().modes() != 1 {
        return Err(Error::InvalidArgument("reduction bases are built per mode".into()));
    }
    let n = rho_lambda.space().total_dim();
    check_dim(d, n)?;
    let (a, b) = (rho_lambda.to_density(), rho_0.to_density());
    let jr = jade(&[a.clone(), b.clone()], opts)?;
    if !jr.converged {
        log::warn!("jade stopped after {} sweeps without converging", jr.sweeps);
    }
    let sigma = jr.t.adjoint() * (a + b) * &jr.t;
    let raw: Vec<f64> = (0..n).map(|i| sigma[(i, i)].norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw[i].total_cmp(&raw[j]));
    let mut t = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        t.set_column(k, &jr.t.column(i));
    }
    let weights = order.iter().map(|&i| raw[i]).collect();
    Ok(ReductionBasis { t, d, lambda, weights, convention: BlockConvention::Last, manifest_hash: None })
}

/// Plain Fock truncation: `T = I`, first `d` levels retained.
pub fn fock_truncation_basis(n: usize, d: usize) -> Result<ReductionBasis> {
    check_dim(d, n)?;
    Ok(ReductionBasis {
        t: DMatrix::identity(n, n),
        d,
        lambda: 0.0,
        weights: vec![],
        convention: BlockConvention::First,
        manifest_hash: None,
    })
}

/// `V^dagger X V` on the reduced single-mode space.
pub fn reduce_operator(x: &Operator, basis: &ReductionBasis) -> Result<Operator> {
    if x.dim() != basis.full_dim() {
        return Err(Error::DimensionMismatch { expected: basis.full_dim(), found: x.dim() });
    }
    let v = basis.isometry();
    let r = v.adjoint() * x.to_dense() * &v;
    Operator::from_dense(basis.reduced_space(), &r)
}

/// `T [0 ⊕ rho_r] T^dagger` for a quasi-principal-component basis.
pub fn embed_jade_state(rho_r: &QuantumState, basis: &ReductionBasis) -> Result<QuantumState> {
    if basis.convention != BlockConvention::Last {
        return Err(Error::InvalidBasis("expected a last-block basis".into()));
    }
    basis.embed_state(rho_r)
}

/// `rho_r ⊕ 0` in a Fock space of dimension `n`.
pub fn embed_fock_state(rho_r: &QuantumState, n: usize) -> Result<QuantumState> {
    fock_truncation_basis(n, rho_r.space().total_dim())?.embed_state(rho_r)
}

/// Lowering operator and bare Kerr Hamiltonian of a cavity in a reduced basis.
#[derive(Clone, Debug)]
pub struct ReducedCavity {
    pub a: Operator,
    pub h0: Operator,
    pub kappa: f64,
}

/// `a_r = V^dagger a V` and `H0_r = V^dagger H0 V` for `H0 = Δ a†a + χ a†a†aa`.
pub fn reduced_kerr_cavity(basis: &ReductionBasis, kappa: f64, delta: f64, chi: f64) -> Result<ReducedCavity> {
    let full = SpaceDescriptor::single(basis.full_dim())?;
    let a = fock::annihilation(&full, 0)?;
    let h0 = fock::kerr_hamiltonian(&full, 0, delta, chi)?;
    Ok(ReducedCavity { a: reduce_operator(&a, basis)?, h0: reduce_operator(&h0, basis)?, kappa })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coherent_like(n: usize, amp: f64) -> QuantumState {
        let mut psi = nalgebra::DVector::<C64>::zeros(n);
        let mut c = 1.0;
        for k in 0..n {
            if k > 0 {
                c *= amp / (k as f64).sqrt();
            }
            psi[k] = C64::new(c, 0.0);
        }
        let psi = psi.normalize();
        let rho = &psi * psi.adjoint() * C64::new(0.7, 0.0)
            + DMatrix::from_fn(n, n, |i, j| if i == j && i < 2 { C64::new(0.15, 0.0) } else { C64::new(0.0, 0.0) });
        QuantumState::density(SpaceDescriptor::single(n).unwrap(), rho).unwrap()
    }

    #[test]
    fn lambda_zero_is_rejected() {
        let s = coherent_like(6, 1.0);
        assert!(matches!(build_basis(&s, &s, 3, 0.0, &JadeOptions::default()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn full_dimension_basis_round_trips_states() {
        let rl = coherent_like(8, 1.5);
        let r0 = QuantumState::density(SpaceDescriptor::single(8).unwrap(), QuantumState::vacuum(SpaceDescriptor::single(8).unwrap()).to_density()).unwrap();
        let b = build_basis(&rl, &r0, 8, 1.5, &JadeOptions::default()).unwrap();
        b.validate().unwrap();
        let v = b.isometry();
        let reduced = v.adjoint() * rl.to_density() * &v;
        let rr = QuantumState::density(b.reduced_space(), reduced).unwrap();
        let back = embed_jade_state(&rr, &b).unwrap().to_density();
        assert!((back - rl.to_density()).iter().all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn retained_block_carries_the_weight() {
        let rl = coherent_like(10, 1.2);
        let r0 = QuantumState::density(SpaceDescriptor::single(10).unwrap(), QuantumState::vacuum(SpaceDescriptor::single(10).unwrap()).to_density()).unwrap();
        let b = build_basis(&rl, &r0, 4, 1.2, &JadeOptions::default()).unwrap();
        let kept: f64 = b.weights[6..].iter().sum();
        let total: f64 = b.weights.iter().sum();
        assert!(kept / total > 0.99);
    }

    #[test]
    fn fock_embedding_pads_with_zeros() {
        let r = QuantumState::vacuum(SpaceDescriptor::single(3).unwrap());
        let r = QuantumState::density(r.space().clone(), r.to_density()).unwrap();
        let e = embed_fock_state(&r, 5).unwrap().to_density();
        assert_eq!(e[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(e.nrows(), 5);
    }

    #[test]
    fn basis_file_round_trip_is_bit_exact() {
        let rl = coherent_like(6, 1.1);
        let r0 = QuantumState::density(SpaceDescriptor::single(6).unwrap(), QuantumState::vacuum(SpaceDescriptor::single(6).unwrap()).to_density()).unwrap();
        let mut b = build_basis(&rl, &r0, 3, 1.1, &JadeOptions::default()).unwrap();
        b.manifest_hash = Some("abc123".into());
        let mut buf = Vec::new();
        b.write(&mut buf).unwrap();
        let back = ReductionBasis::read(buf.as_slice()).unwrap();
        assert_eq!(back, b);
    }

    #[test]
    fn reduced_fock_operators_are_truncations() {
        let b = fock_truncation_basis(8, 5).unwrap();
        let rc = reduced_kerr_cavity(&b, 25.0, 50.0, -50.0 / 60.0).unwrap();
        let small = SpaceDescriptor::single(5).unwrap();
        assert!(rc.a.sub(&fock::annihilation(&small, 0).unwrap()).unwrap().max_abs() < 1e-15);
        assert!(rc.h0.sub(&fock::kerr_hamiltonian(&small, 0, 50.0, -50.0 / 60.0).unwrap()).unwrap().max_abs() < 1e-12);
    }
}
