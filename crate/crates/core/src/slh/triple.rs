// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::expr::{DriveExpr, Drives, ParametricOperator};
use super::open::OpenSystem;
use crate::error::{Error, Result};
use crate::fock::{Operator, SpaceDescriptor};

const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance on `||S^dagger S - I||` accepted for a scattering matrix.
pub const UNITARY_TOL: f64 = 1e-10;

/// Smallest `|1 - S_kl|` accepted by [`SlhTriple::feedback`].
pub const FEEDBACK_TOL: f64 = 1e-12;

/// Open quantum network `(S, L, H)` with a scalar scattering matrix.
///
/// Invariants: `S` is `n x n` and unitary within [`UNITARY_TOL`], `L` has `n` entries,
/// all operators share one space, and `H` carries no identity component.
#[derive(Clone, Debug, PartialEq)]
pub struct SlhTriple {
    space: SpaceDescriptor,
    s: DMatrix<C64>,
    l: Vec<ParametricOperator>,
    h: ParametricOperator,
}

/// An [`SlhTriple`] evaluated at fixed drive values.
#[derive(Clone, Debug)]
pub struct ConcreteSlh {
    pub s: DMatrix<C64>,
    pub l: Vec<Operator>,
    pub h: Operator,
}

fn unitarity_defect(s: &DMatrix<C64>) -> f64 {
    let n = s.nrows();
    (s.adjoint() * s - DMatrix::<C64>::identity(n, n)).iter().fold(0.0f64, |m, v| m.max(v.norm()))
}

impl SlhTriple {
    pub fn new(
        space: SpaceDescriptor,
        s: DMatrix<C64>,
        l: Vec<ParametricOperator>,
        h: ParametricOperator,
    ) -> Result<Self> {
        if s.nrows() != s.ncols() {
            return Err(Error::ChannelMismatch { left: s.nrows(), right: s.ncols() });
        }
        if s.nrows() != l.len() {
            return Err(Error::ChannelMismatch { left: s.nrows(), right: l.len() });
        }
        for op in l.iter().chain(std::iter::once(&h)) {
            space.check_same(op.space())?;
        }
        let defect = unitarity_defect(&s);
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self { space, s, l, h: h.without_identity() })
    }

    /// Static scattering component `(S, 0, 0)`.
    pub fn static_network(space: SpaceDescriptor, s: DMatrix<C64>) -> Result<Self> {
        let n = s.nrows();
        let l = vec![ParametricOperator::zero(space.clone()); n];
        let h = ParametricOperator::zero(space.clone());
        Self::new(space, s, l, h)
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn channels(&self) -> usize {
        self.l.len()
    }

    pub fn s(&self) -> &DMatrix<C64> {
        &self.s
    }

    pub fn l(&self) -> &[ParametricOperator] {
        &self.l
    }

    pub fn h(&self) -> &ParametricOperator {
        &self.h
    }

    /// Concatenation `self ⊞ other`: block-diagonal `S`, stacked `L`, summed `H`.
    pub fn concat(&self, other: &SlhTriple) -> Result<Self> {
        self.space.check_same(&other.space)?;
        let (n1, n2) = (self.channels(), other.channels());
        let mut s = DMatrix::zeros(n1 + n2, n1 + n2);
        s.view_mut((0, 0), (n1, n1)).copy_from(&self.s);
        s.view_mut((n1, n1), (n2, n2)).copy_from(&other.s);
        let mut l = self.l.clone();
        l.extend(other.l.iter().cloned());
        let h = self.h.add(&other.h)?;
        Ok(Self { space: self.space.clone(), s, l, h })
    }

    /// Series product `self ◁ first`: the outputs of `first` feed the inputs of `self`.
    pub fn series(&self, first: &SlhTriple) -> Result<Self> {
        self.space.check_same(&first.space)?;
        if self.channels() != first.channels() {
            return Err(Error::ChannelMismatch { left: self.channels(), right: first.channels() });
        }
        let s = &self.s * &first.s;
        let s2_l1 = combine(&self.s, &first.l, &self.space)?;
        let l = self.l.iter().zip(&s2_l1).map(|(a, b)| a.add(b)).collect::<Result<Vec<_>>>()?;
        let mut h = first.h.add(&self.h)?;
        for (l2, m) in self.l.iter().zip(&s2_l1) {
            h = h.add(&l2.adjoint_mul_traceless(m)?.imag_part())?;
        }
        Ok(Self { space: self.space.clone(), s, l, h })
    }

    /// Feedback reduction routing output `k` back into input `l` (1-based).
    pub fn feedback(&self, k: usize, l: usize) -> Result<Self> {
        let n = self.channels();
        for idx in [k, l] {
            if idx == 0 || idx > n {
                return Err(Error::ChannelOutOfRange { index: idx, channels: n });
            }
        }
        let (k, l) = (k - 1, l - 1);
        let denom = ONE - self.s[(k, l)];
        if denom.norm() < FEEDBACK_TOL {
            return Err(Error::SingularFeedback(denom.norm()));
        }
        let inv = ONE / denom;
        let rows: Vec<usize> = (0..n).filter(|&i| i != k).collect();
        let cols: Vec<usize> = (0..n).filter(|&j| j != l).collect();
        let s = DMatrix::from_fn(n - 1, n - 1, |i, j| {
            let (i, j) = (rows[i], cols[j]);
            self.s[(i, j)] + self.s[(i, l)] * inv * self.s[(k, j)]
        });
        let lk = &self.l[k];
        let lred = rows
            .iter()
            .map(|&i| self.l[i].add_scaled(lk, self.s[(i, l)] * inv))
            .collect::<Result<Vec<_>>>()?;
        let mut h = self.h.clone();
        for (j, lj) in self.l.iter().enumerate() {
            let c = self.s[(j, l)] * inv;
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            h = h.add(&lj.adjoint_mul_traceless(&lk.scale(c))?.imag_part())?;
        }
        Ok(Self { space: self.space.clone(), s, l: lred, h })
    }

    /// Numerical `(S, L, H)` at the given drives.
    pub fn evaluate(&self, drives: &Drives) -> Result<ConcreteSlh> {
        Ok(ConcreteSlh {
            s: self.s.clone(),
            l: self.l.iter().map(|op| op.evaluate(drives)).collect::<Result<_>>()?,
            h: self.h.evaluate(drives)?,
        })
    }

    /// Names of all drive amplitudes the triple depends on.
    pub fn params(&self) -> Vec<String> {
        let mut p = self.h.params();
        for op in &self.l {
            p.extend(op.params());
        }
        p.into_iter().collect()
    }

    /// Master-equation generator `-i[H, .] + sum_j D[L_j]` of the network.
    pub fn to_open_system(&self) -> Result<OpenSystem> {
        OpenSystem::new(self.space.clone(), &self.h, &self.l)
    }
}

/// `S * L` as a list of parametric operators.
fn combine(
    s: &DMatrix<C64>,
    l: &[ParametricOperator],
    space: &SpaceDescriptor,
) -> Result<Vec<ParametricOperator>> {
    (0..s.nrows())
        .map(|i| {
            let mut acc = ParametricOperator::zero(space.clone());
            for (j, lj) in l.iter().enumerate() {
                if s[(i, j)] != C64::new(0.0, 0.0) {
                    acc = acc.add_scaled(lj, s[(i, j)])?;
                }
            }
            Ok(acc)
        })
        .collect()
}

/// `1_n`: `n` pass-through channels.
pub fn identity_network(space: &SpaceDescriptor, n: usize) -> Result<SlhTriple> {
    SlhTriple::static_network(space.clone(), DMatrix::identity(n, n))
}

/// Two-port beamsplitter `[[cos θ, -sin θ], [sin θ, cos θ]]`.
pub fn beamsplitter(space: &SpaceDescriptor, theta: f64) -> Result<SlhTriple> {
    let (sn, cs) = theta.sin_cos();
    let s = DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(cs, 0.0), C64::new(-sn, 0.0), C64::new(sn, 0.0), C64::new(cs, 0.0)],
    );
    SlhTriple::static_network(space.clone(), s)
}

/// Single-channel phase shift `e^{i φ}`.
pub fn phase_shifter(space: &SpaceDescriptor, phi: f64) -> Result<SlhTriple> {
    SlhTriple::static_network(space.clone(), DMatrix::from_element(1, 1, C64::from_polar(1.0, phi)))
}

/// Coherent displacement `(1, amplitude, 0)`.
pub fn displacement(space: &SpaceDescriptor, amplitude: DriveExpr) -> Result<SlhTriple> {
    SlhTriple::new(
        space.clone(),
        DMatrix::from_element(1, 1, ONE),
        vec![ParametricOperator::scalar(space.clone(), amplitude)],
        ParametricOperator::zero(space.clone()),
    )
}

/// Channel permutation with `P_jk = δ_{j, σ(k)}`; `sigma` is 1-based.
pub fn permutation(space: &SpaceDescriptor, sigma: &[usize]) -> Result<SlhTriple> {
    let n = sigma.len();
    let mut seen = vec![false; n];
    for &v in sigma {
        if v == 0 || v > n || seen[v - 1] {
            return Err(Error::InvalidPermutation(sigma.to_vec()));
        }
        seen[v - 1] = true;
    }
    let mut s = DMatrix::zeros(n, n);
    for (k, &v) in sigma.iter().enumerate() {
        s[(v - 1, k)] = ONE;
    }
    SlhTriple::static_network(space.clone(), s)
}

/// Two-port cavity `(I_2, [sqrt(κ) a; sqrt(κ) a], H0)` built from given operators.
pub fn cavity_from_ops(a: &Operator, h0: &Operator, kappa: f64) -> Result<SlhTriple> {
    let space = a.space().clone();
    let la = ParametricOperator::from_operator(a.scale(C64::new(kappa.sqrt(), 0.0)));
    SlhTriple::new(
        space,
        DMatrix::identity(2, 2),
        vec![la.clone(), la],
        ParametricOperator::from_operator(h0.clone()),
    )
}

/// The two single-port halves `(1, sqrt(κ) a, 0)` and `(1, sqrt(κ) a, H0)` of a cavity.
pub fn cavity_halves_from_ops(a: &Operator, h0: &Operator, kappa: f64) -> Result<(SlhTriple, SlhTriple)> {
    let space = a.space().clone();
    let la = ParametricOperator::from_operator(a.scale(C64::new(kappa.sqrt(), 0.0)));
    let one = DMatrix::from_element(1, 1, ONE);
    let k1 = SlhTriple::new(space.clone(), one.clone(), vec![la.clone()], ParametricOperator::zero(space.clone()))?;
    let k2 = SlhTriple::new(space, one, vec![la], ParametricOperator::from_operator(h0.clone()))?;
    Ok((k1, k2))
}

/// Kerr cavity on `mode` of `space` with `H0 = Δ a†a + χ a†a†aa`.
pub fn kerr_cavity(space: &SpaceDescriptor, mode: usize, kappa: f64, delta: f64, chi: f64) -> Result<SlhTriple> {
    let a = crate::fock::annihilation(space, mode)?;
    let h0 = crate::fock::kerr_hamiltonian(space, mode, delta, chi)?;
    cavity_from_ops(&a, &h0, kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::annihilation;
    use proptest::prelude::*;

    fn space() -> SpaceDescriptor {
        SpaceDescriptor::single(4).unwrap()
    }

    fn max_dev(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    #[test]
    fn beamsplitter_feedback_gives_minus_one() {
        let s = space();
        let fb = beamsplitter(&s, std::f64::consts::FRAC_PI_4).unwrap().feedback(2, 2).unwrap();
        assert_eq!(fb.channels(), 1);
        assert!((fb.s()[(0, 0)] + ONE).norm() < 1e-12);
    }

    #[test]
    fn feedback_of_identity_pair_is_singular() {
        assert!(matches!(
            identity_network(&space(), 2).unwrap().feedback(1, 1),
            Err(Error::SingularFeedback(_))
        ));
        assert!(matches!(
            identity_network(&space(), 2).unwrap().feedback(3, 1),
            Err(Error::ChannelOutOfRange { .. })
        ));
    }

    #[test]
    fn permutation_routes_channels() {
        let p = permutation(&space(), &[2, 3, 1]).unwrap();
        assert_eq!(p.s()[(1, 0)], ONE);
        assert_eq!(p.s()[(2, 1)], ONE);
        assert_eq!(p.s()[(0, 2)], ONE);
        assert!(permutation(&space(), &[1, 1, 2]).is_err());
    }

    #[test]
    fn series_with_identity_is_neutral() {
        let s = space();
        let k = kerr_cavity(&s, 0, 25.0, 50.0, -50.0 / 60.0).unwrap();
        let id = identity_network(&s, 2).unwrap();
        assert_eq!(id.series(&k).unwrap(), k);
        assert_eq!(k.series(&id).unwrap(), k);
    }

    #[test]
    fn drive_into_cavity_adds_expected_hamiltonian() {
        let s = space();
        let kappa = 25.0;
        let (_, k2) = cavity_halves_from_ops(
            &annihilation(&s, 0).unwrap(),
            &Operator::zeros(s.clone()),
            kappa,
        )
        .unwrap();
        let g = k2.series(&displacement(&s, DriveExpr::drive("e")).unwrap()).unwrap();
        let e = C64::new(1.5, -0.5);
        let d: Drives = [("e".to_string(), e)].into();
        let h = g.evaluate(&d).unwrap().h;
        let a = annihilation(&s, 0).unwrap();
        // Im(e sqrt(κ) a†) = i sqrt(κ)/2 (e* a - e a†).
        let expect = a
            .scale(e.conj())
            .add_scaled(&a.dagger(), -e)
            .unwrap()
            .scale(C64::new(0.0, kappa.sqrt() / 2.0));
        assert!(h.sub(&expect).unwrap().max_abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn composition_preserves_unitarity(t1 in -3.0f64..3.0, t2 in -3.0f64..3.0, p in -3.0f64..3.0) {
            let s = space();
            let g = beamsplitter(&s, t1).unwrap()
                .series(&phase_shifter(&s, p).unwrap().concat(&identity_network(&s, 1).unwrap()).unwrap())
                .unwrap()
                .series(&beamsplitter(&s, t2).unwrap())
                .unwrap();
            prop_assert!(unitarity_defect(g.s()) < 1e-12);
        }

        #[test]
        fn feedback_preserves_unitarity(t1 in 0.1f64..3.0, t2 in 0.1f64..3.0, p in -3.0f64..3.0) {
            let s = space();
            let g = beamsplitter(&s, t1).unwrap()
                .concat(&phase_shifter(&s, p).unwrap()).unwrap()
                .series(&permutation(&s, &[3, 1, 2]).unwrap()).unwrap()
                .series(&phase_shifter(&s, -p).unwrap().concat(&beamsplitter(&s, t2).unwrap()).unwrap())
                .unwrap();
            if let Ok(fb) = g.feedback(3, 2) {
                prop_assert!(unitarity_defect(fb.s()) < 1e-9);
            }
        }

        #[test]
        fn series_is_associative(t1 in -3.0f64..3.0, t2 in -3.0f64..3.0, xr in -2.0f64..2.0, xi in -2.0f64..2.0) {
            let s = space();
            let k = kerr_cavity(&s, 0, 25.0, 50.0, -50.0 / 60.0).unwrap();
            let b1 = beamsplitter(&s, t1).unwrap();
            let b2 = beamsplitter(&s, t2).unwrap();
            let d = displacement(&s, DriveExpr::drive("x")).unwrap()
                .concat(&displacement(&s, DriveExpr::constant(C64::new(0.3, 0.1))).unwrap()).unwrap();
            let lhs = b2.series(&k).unwrap().series(&b1.series(&d).unwrap()).unwrap();
            let rhs = b2.series(&k.series(&b1).unwrap()).unwrap().series(&d).unwrap();
            let drives: Drives = [("x".to_string(), C64::new(xr, xi))].into();
            let (l, r) = (lhs.evaluate(&drives).unwrap(), rhs.evaluate(&drives).unwrap());
            prop_assert!(max_dev(&l.s, &r.s) < 1e-12);
            for (a, b) in l.l.iter().zip(&r.l) {
                prop_assert!(a.sub(b).unwrap().max_abs() < 1e-10);
            }
            prop_assert!(l.h.sub(&r.h).unwrap().max_abs() < 1e-10);
        }
    }
}
