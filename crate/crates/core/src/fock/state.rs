// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::{Operator, SpaceDescriptor};
use crate::error::{Error, Result};
use crate::linalg;

/// Default tolerance for trace, Hermiticity and positivity checks on density matrices.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
enum Payload {
    Pure(DVector<C64>),
    Density(DMatrix<C64>),
}

/// Pure state vector or density matrix on a [`SpaceDescriptor`].
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    space: SpaceDescriptor,
    payload: Payload,
}

/// Numerical health of a state: all three quantities are zero for an exact state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateValidity {
    /// `|Tr rho - 1|`.
    pub trace_defect: f64,
    /// Largest entry of `|rho - rho^dagger|`.
    pub hermiticity_defect: f64,
    /// Smallest eigenvalue of the Hermitian part.
    pub min_eigenvalue: f64,
}

impl StateValidity {
    pub fn is_valid(&self, tol: f64) -> bool {
        self.trace_defect <= tol && self.hermiticity_defect <= tol && self.min_eigenvalue >= -tol
    }
}

impl QuantumState {
    /// Normalised pure state; the norm must be within `STATE_TOL` of one.
    pub fn pure(space: SpaceDescriptor, psi: DVector<C64>) -> Result<Self> {
        if psi.len() != space.total_dim() {
            return Err(Error::DimensionMismatch { expected: space.total_dim(), found: psi.len() });
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(Self { space, payload: Payload::Pure(psi) })
    }

    /// Density matrix validated against `STATE_TOL`.
    pub fn density(space: SpaceDescriptor, rho: DMatrix<C64>) -> Result<Self> {
        Self::density_with_tol(space, rho, STATE_TOL)
    }

    /// Density matrix validated against a caller-supplied tolerance.
    pub fn density_with_tol(space: SpaceDescriptor, rho: DMatrix<C64>, tol: f64) -> Result<Self> {
        let n = space.total_dim();
        if rho.nrows() != n || rho.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: rho.nrows() });
        }
        let state = Self { space, payload: Payload::Density(rho) };
        let v = state.validity();
        if !v.is_valid(tol) {
            return Err(Error::InvalidState(format!(
                "trace defect {:.3e}, hermiticity defect {:.3e}, min eigenvalue {:.3e}",
                v.trace_defect, v.hermiticity_defect, v.min_eigenvalue
            )));
        }
        Ok(state)
    }

    /// Fock basis state `|n_0, n_1, ...>`.
    pub fn fock(space: SpaceDescriptor, occupation: &[usize]) -> Result<Self> {
        if occupation.len() != space.modes() {
            return Err(Error::DimensionMismatch { expected: space.modes(), found: occupation.len() });
        }
        let mut idx = 0;
        for (m, (&k, &d)) in occupation.iter().zip(space.mode_dims()).enumerate() {
            if k >= d {
                return Err(Error::InvalidState(format!("level {k} exceeds truncation of mode {m}")));
            }
            idx = idx * d + k;
        }
        let mut psi = DVector::zeros(space.total_dim());
        psi[idx] = C64::new(1.0, 0.0);
        Ok(Self { space, payload: Payload::Pure(psi) })
    }

    pub fn vacuum(space: SpaceDescriptor) -> Self {
        let occ = vec![0; space.modes()];
        Self::fock(space, &occ).expect("vacuum is always representable")
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.payload, Payload::Pure(_))
    }

    pub fn as_pure(&self) -> Option<&DVector<C64>> {
        match &self.payload {
            Payload::Pure(p) => Some(p),
            Payload::Density(_) => None,
        }
    }

    /// Density matrix of the state (`|psi><psi|` for pure states).
    pub fn to_density(&self) -> DMatrix<C64> {
        match &self.payload {
            Payload::Pure(p) => p * p.adjoint(),
            Payload::Density(r) => r.clone(),
        }
    }

    /// `<A>`; pure states use `<psi|A|psi>`, mixed states `Tr(A rho)`.
    pub fn expect(&self, op: &Operator) -> Result<C64> {
        self.space.check_same(op.space())?;
        Ok(match &self.payload {
            Payload::Pure(p) => op.sandwich(p.as_slice()),
            Payload::Density(r) => {
                let mut s = C64::new(0.0, 0.0);
                for (i, j, v) in op.triplets() {
                    s += v * r[(j, i)];
                }
                s
            }
        })
    }

    pub fn validity(&self) -> StateValidity {
        match &self.payload {
            Payload::Pure(p) => StateValidity {
                trace_defect: (p.norm_squared() - 1.0).abs(),
                hermiticity_defect: 0.0,
                min_eigenvalue: 0.0,
            },
            Payload::Density(r) => {
                let trace = r.trace();
                let trace_defect = (trace - C64::new(1.0, 0.0)).norm();
                let hermiticity_defect = (r - r.adjoint()).iter().fold(0.0f64, |m, v| m.max(v.norm()));
                let h = (r + r.adjoint()) * C64::new(0.5, 0.0);
                let (values, _) = linalg::eigh(&h);
                StateValidity { trace_defect, hermiticity_defect, min_eigenvalue: values[0] }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::annihilation;

    #[test]
    fn fock_state_expectations() {
        let s = SpaceDescriptor::new(vec![3, 4]).unwrap();
        let st = QuantumState::fock(s.clone(), &[2, 1]).unwrap();
        let na = crate::fock::number(&s, 0).unwrap();
        let nb = crate::fock::number(&s, 1).unwrap();
        assert!((st.expect(&na).unwrap().re - 2.0).abs() < 1e-15);
        assert!((st.expect(&nb).unwrap().re - 1.0).abs() < 1e-15);
        let rho = QuantumState::density(s.clone(), st.to_density()).unwrap();
        assert!((rho.expect(&na).unwrap().re - 2.0).abs() < 1e-15);
        assert!(QuantumState::fock(s, &[3, 0]).is_err());
    }

    #[test]
    fn density_validation_rejects_bad_matrices() {
        let s = SpaceDescriptor::single(2).unwrap();
        let bad_trace = DMatrix::from_diagonal_element(2, 2, C64::new(1.0, 0.0));
        assert!(QuantumState::density(s.clone(), bad_trace).is_err());
        let negative = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.5, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-0.5, 0.0)],
        );
        assert!(QuantumState::density(s.clone(), negative).is_err());
        let a = annihilation(&s, 0).unwrap().to_dense();
        let non_herm = DMatrix::from_diagonal_element(2, 2, C64::new(0.5, 0.0)) + a * C64::new(0.1, 0.0);
        assert!(QuantumState::density(s, non_herm).is_err());
    }
}
