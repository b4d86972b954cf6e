// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::params::CavityParams;
use crate::error::{Error, Result};
use crate::fock::{self, Operator, QuantumState, SpaceDescriptor};
use crate::reduction::{reduce_operator, ReductionBasis};
use crate::slh::CavityProvider;

/// Identical Kerr cavities, one per tensor slot, in a full or reduced representation.
///
/// Every cavity uses the same single-mode `a` and `H0`, embedded on its own slot.
#[derive(Clone, Debug)]
pub struct CavityFactory {
    space: SpaceDescriptor,
    params: CavityParams,
    lowering: Vec<Operator>,
    bare: Vec<Operator>,
    /// Single-mode vacuum (or its normalised projection) used as the initial state.
    vacuum: DVector<C64>,
    reduced: bool,
}

impl CavityFactory {
    /// `modes` cavities truncated to `n` Fock levels each.
    pub fn full(modes: usize, n: usize, params: &CavityParams) -> Result<Self> {
        let single = SpaceDescriptor::single(n)?;
        let a = fock::annihilation(&single, 0)?;
        let h0 = fock::kerr_hamiltonian(&single, 0, params.delta, params.chi)?;
        let mut vac = DVector::zeros(n);
        vac[0] = C64::new(1.0, 0.0);
        Self::from_single(modes, &a, &h0, vac, params, false)
    }

    /// `modes` cavities represented in the retained block of `basis`.
    pub fn reduced(modes: usize, basis: &ReductionBasis, params: &CavityParams) -> Result<Self> {
        let full = SpaceDescriptor::single(basis.full_dim())?;
        let a = reduce_operator(&fock::annihilation(&full, 0)?, basis)?;
        let h0 = reduce_operator(&fock::kerr_hamiltonian(&full, 0, params.delta, params.chi)?, basis)?;
        // Projection of |0> onto the retained block.
        let v = basis.isometry();
        let proj: DVector<C64> = v.row(0).adjoint();
        let norm = proj.norm();
        if norm < 1e-12 {
            return Err(Error::InvalidBasis("vacuum has no overlap with the retained block".into()));
        }
        Self::from_single(modes, &a, &h0, proj / C64::new(norm, 0.0), params, true)
    }

    fn from_single(
        modes: usize,
        a: &Operator,
        h0: &Operator,
        vacuum: DVector<C64>,
        params: &CavityParams,
        reduced: bool,
    ) -> Result<Self> {
        params.validate()?;
        if modes == 0 {
            return Err(Error::InvalidArgument("at least one cavity is required".into()));
        }
        let d = a.dim();
        let space = SpaceDescriptor::new(vec![d; modes])?;
        let lowering = (0..modes).map(|m| Operator::embed(&space, m, a)).collect::<Result<Vec<_>>>()?;
        let bare = (0..modes).map(|m| Operator::embed(&space, m, h0)).collect::<Result<Vec<_>>>()?;
        Ok(Self { space, params: *params, lowering, bare, vacuum, reduced })
    }

    pub fn modes(&self) -> usize {
        self.lowering.len()
    }

    pub fn params(&self) -> &CavityParams {
        &self.params
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    /// `a_i^dagger a_i` on the joint space.
    pub fn number(&self, index: usize) -> Result<Operator> {
        let a = self.lowering(index)?;
        a.dagger().matmul(a)
    }

    /// Product of per-cavity vacua (projected vacua for reduced cavities).
    pub fn initial_state(&self) -> Result<QuantumState> {
        let mut psi = self.vacuum.clone();
        for _ in 1..self.modes() {
            psi = psi.kronecker(&self.vacuum);
        }
        QuantumState::pure(self.space.clone(), psi)
    }
}

impl CavityProvider for CavityFactory {
    fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    fn kappa(&self) -> f64 {
        self.params.kappa
    }

    fn lowering(&self, index: usize) -> Result<&Operator> {
        self.lowering.get(index).ok_or(Error::ModeOutOfRange { mode: index, modes: self.modes() })
    }

    fn bare_hamiltonian(&self, index: usize) -> Result<&Operator> {
        self.bare.get(index).ok_or(Error::ModeOutOfRange { mode: index, modes: self.modes() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::fock_truncation_basis;

    #[test]
    fn reduced_with_identity_basis_matches_full() {
        let p = CavityParams::default();
        let full = CavityFactory::full(2, 4, &p).unwrap();
        let red = CavityFactory::reduced(2, &fock_truncation_basis(4, 4).unwrap(), &p).unwrap();
        for m in 0..2 {
            assert!(full.lowering(m).unwrap().sub(red.lowering(m).unwrap()).unwrap().max_abs() < 1e-15);
            assert!(full.bare_hamiltonian(m).unwrap().sub(red.bare_hamiltonian(m).unwrap()).unwrap().max_abs() < 1e-12);
        }
        assert_eq!(full.initial_state().unwrap().to_density(), red.initial_state().unwrap().to_density());
    }

    #[test]
    fn modes_commute() {
        let f = CavityFactory::full(2, 3, &CavityParams::default()).unwrap();
        let c = f.lowering(0).unwrap().commutator(&f.lowering(1).unwrap().dagger()).unwrap();
        assert_eq!(c.max_abs(), 0.0);
    }
}
