// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::error::Result;
use crate::fock::QuantumState;
use crate::linalg::psd_sqrt;

/// Uhlmann fidelity `Tr sqrt(sqrt(rho) sigma sqrt(rho))`, clamped to `[0, 1]`.
///
/// Symmetric in its arguments up to rounding; equals 1 only for identical states.
pub fn fidelity(rho: &QuantumState, sigma: &QuantumState) -> Result<f64> {
    rho.space().check_same(sigma.space())?;
    let s = psd_sqrt(&rho.to_density());
    let inner = &s * sigma.to_density() * &s;
    let f = psd_sqrt(&inner).trace().re;
    Ok(f.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::SpaceDescriptor;
    use nalgebra::{DMatrix, DVector};
    use num_complex::Complex64 as C64;
    use proptest::prelude::*;

    fn random_density(n: usize, seed: &[f64]) -> QuantumState {
        let g = DMatrix::from_fn(n, n, |i, j| {
            let k = 2 * (i * n + j);
            C64::new(seed[k % seed.len()], seed[(k + 1) % seed.len()])
        });
        let rho = &g * g.adjoint();
        let tr = rho.trace();
        QuantumState::density(SpaceDescriptor::single(n).unwrap(), rho / tr).unwrap()
    }

    #[test]
    fn pure_states_give_overlap_modulus() {
        let sp = SpaceDescriptor::single(2).unwrap();
        let a = QuantumState::pure(sp.clone(), DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)])).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let b = QuantumState::pure(sp, DVector::from_vec(vec![C64::new(h, 0.0), C64::new(0.0, h)])).unwrap();
        assert!((fidelity(&a, &b).unwrap() - h).abs() < 1e-7);
    }

    proptest! {
        #[test]
        fn fidelity_is_symmetric_and_bounded(seed in proptest::collection::vec(-1.0f64..1.0, 50)) {
            prop_assume!(seed.iter().any(|x| x.abs() > 1e-3));
            let a = random_density(4, &seed);
            let rev: Vec<f64> = seed.iter().rev().copied().collect();
            let b = random_density(4, &rev);
            let fab = fidelity(&a, &b).unwrap();
            let fba = fidelity(&b, &a).unwrap();
            prop_assert!((0.0..=1.0).contains(&fab));
            prop_assert!((fab - fba).abs() < 1e-6);
            prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-6);
        }
    }
}
