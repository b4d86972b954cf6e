// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64 as C64;

use super::expr::{DriveKey, Drives, ParametricOperator};
use crate::error::{Error, Result};
use crate::fock::{Operator, SpaceDescriptor};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Drive-dependent scalar multiplying one operator term. Parameters are indices into
/// [`OpenSystem::params`]; the flag selects the conjugate amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Monomial {
    One,
    Lin(usize, bool),
    /// Product of two (possibly conjugated) amplitudes.
    Quad((usize, bool), (usize, bool)),
}

impl Monomial {
    #[inline]
    pub fn value(&self, values: &[C64]) -> C64 {
        let f = |(i, c): (usize, bool)| if c { values[i].conj() } else { values[i] };
        match *self {
            Monomial::One => ONE,
            Monomial::Lin(i, c) => f((i, c)),
            Monomial::Quad(a, b) => f(a) * f(b),
        }
    }

    fn conj(&self) -> Self {
        match *self {
            Monomial::One => Monomial::One,
            Monomial::Lin(i, c) => Monomial::Lin(i, !c),
            Monomial::Quad((i, ci), (j, cj)) => Monomial::Quad((i, !ci), (j, !cj)),
        }
    }

    fn mul(&self, other: &Monomial) -> Result<Self> {
        Ok(match (*self, *other) {
            (Monomial::One, m) | (m, Monomial::One) => m,
            (Monomial::Lin(i, ci), Monomial::Lin(j, cj)) => {
                let (a, b) = ((i, ci), (j, cj));
                Monomial::Quad(a.min(b), a.max(b))
            }
            _ => return Err(Error::NonAffine("cubic drive monomial".into())),
        })
    }
}

/// Operator polynomial in the drive amplitudes: `sum_t m_t(x) O_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct DrivenOperator {
    dim: usize,
    terms: Vec<(Monomial, Operator)>,
}

impl DrivenOperator {
    /// Constant operator.
    pub fn fixed(op: Operator) -> Self {
        Self { dim: op.dim(), terms: vec![(Monomial::One, op)] }
    }

    fn from_map(dim: usize, map: BTreeMap<Monomial, Operator>) -> Self {
        Self { dim, terms: map.into_iter().filter(|(_, op)| op.nnz() > 0).collect() }
    }

    /// Compiles a parametric operator, resolving parameter names through `index`.
    pub fn compile(p: &ParametricOperator, index: &BTreeMap<String, usize>) -> Result<Self> {
        let space = p.space().clone();
        let mut map: BTreeMap<Monomial, Operator> = BTreeMap::new();
        let key_mono = |k: &DriveKey| -> Result<Monomial> {
            let i = *index.get(&k.name).ok_or_else(|| Error::UnboundParameter(k.name.clone()))?;
            Ok(Monomial::Lin(i, k.conj))
        };
        let id = Operator::identity(space.clone());
        let mut push = |m: Monomial, op: Operator| -> Result<()> {
            let cur = map.remove(&m);
            let v = match cur {
                Some(c) => c.add(&op)?,
                None => op,
            };
            map.insert(m, v);
            Ok(())
        };
        push(Monomial::One, p.constant_part().clone())?;
        let s = p.scalar_part();
        if s.constant_part() != ZERO {
            push(Monomial::One, id.scale(s.constant_part()))?;
        }
        for (k, c) in s.linear_terms() {
            push(key_mono(k)?, id.scale(c))?;
        }
        for (k, op) in p.linear_parts() {
            push(key_mono(k)?, op.clone())?;
        }
        Ok(Self::from_map(space.total_dim(), map))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Monomial, Operator)] {
        &self.terms
    }

    /// Monomial values at the given parameter values, aligned with [`Self::terms`].
    pub fn coefficients(&self, values: &[C64]) -> Vec<C64> {
        self.terms.iter().map(|(m, _)| m.value(values)).collect()
    }

    pub fn evaluate(&self, values: &[C64]) -> Operator {
        let mut it = self.terms.iter();
        let Some((m0, op0)) = it.next() else {
            return Operator::zeros(SpaceDescriptor::single(self.dim).expect("dim > 0"));
        };
        let mut out = op0.scale(m0.value(values));
        for (m, op) in it {
            out = out.add_scaled(op, m.value(values)).expect("terms share a space");
        }
        out
    }

    /// `y += alpha * O(x) v` with precomputed coefficients.
    #[inline]
    pub fn apply_add(&self, coeffs: &[C64], alpha: C64, v: &[C64], y: &mut [C64]) {
        for ((_, op), &c) in self.terms.iter().zip(coeffs) {
            if c != ZERO {
                op.apply_add(alpha * c, v, y);
            }
        }
    }

    /// `Y += alpha * O(x) X` for a row-major `dim x m` block, precomputed coefficients.
    pub fn apply_rows_add(&self, coeffs: &[C64], alpha: C64, x: &[C64], y: &mut [C64], m: usize) {
        for ((_, op), &c) in self.terms.iter().zip(coeffs) {
            if c != ZERO {
                op.apply_rows_add(alpha * c, x, y, m);
            }
        }
    }

    /// Term-wise `<v| O |v>` values; combined with coefficients this gives `<v|O(x)|v>`.
    pub fn sandwich_terms(&self, v: &[C64]) -> Vec<C64> {
        self.terms.iter().map(|(_, op)| op.sandwich(v)).collect()
    }

    /// Term-wise `Tr(O rho)` for a row-major `rho`.
    pub fn trace_terms_rowmajor(&self, rho: &[C64]) -> Vec<C64> {
        self.terms.iter().map(|(_, op)| op.trace_with_rowmajor(rho)).collect()
    }
}

/// Open system `d rho/dt = -i[H, rho] + sum_j D[L_j] rho` with drive-dependent
/// operators, compiled for fast evaluation.
#[derive(Clone, Debug)]
pub struct OpenSystem {
    space: SpaceDescriptor,
    params: Vec<String>,
    hamiltonian: DrivenOperator,
    collapse: Vec<DrivenOperator>,
    /// `H - (i/2) sum_j L_j^dagger L_j`.
    effective: DrivenOperator,
}

impl OpenSystem {
    pub fn new(space: SpaceDescriptor, h: &ParametricOperator, collapse: &[ParametricOperator]) -> Result<Self> {
        let mut names: BTreeSet<String> = h.params();
        for l in collapse {
            space.check_same(l.space())?;
            names.extend(l.params());
        }
        // D[c I] vanishes identically, so identity-only channels carry no dynamics.
        let collapse: Vec<&ParametricOperator> = collapse
            .iter()
            .filter(|l| l.constant_part().nnz() > 0 || l.linear_parts().next().is_some())
            .collect();
        space.check_same(h.space())?;
        let params: Vec<String> = names.into_iter().collect();
        let index: BTreeMap<String, usize> =
            params.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let hamiltonian = DrivenOperator::compile(&h.without_identity(), &index)?;
        let collapse = collapse
            .into_iter()
            .map(|l| DrivenOperator::compile(l, &index))
            .collect::<Result<Vec<_>>>()?;
        let collapse: Vec<DrivenOperator> = collapse.into_iter().filter(|l| !l.terms.is_empty()).collect();
        let mut eff: BTreeMap<Monomial, Operator> = BTreeMap::new();
        for (m, op) in &hamiltonian.terms {
            eff.insert(*m, op.clone());
        }
        let half = C64::new(0.0, -0.5);
        for l in &collapse {
            for (ma, a) in &l.terms {
                let ad = a.dagger();
                for (mb, b) in &l.terms {
                    let m = ma.conj().mul(mb)?;
                    let prod = ad.matmul(b)?.scale(half);
                    let v = match eff.remove(&m) {
                        Some(cur) => cur.add(&prod)?,
                        None => prod,
                    };
                    eff.insert(m, v);
                }
            }
        }
        let effective = DrivenOperator::from_map(space.total_dim(), eff);
        Ok(Self { space, params, hamiltonian, collapse, effective })
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    /// Parameter names in index order.
    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn hamiltonian(&self) -> &DrivenOperator {
        &self.hamiltonian
    }

    pub fn collapse(&self) -> &[DrivenOperator] {
        &self.collapse
    }

    pub fn effective_hamiltonian(&self) -> &DrivenOperator {
        &self.effective
    }

    /// Parameter values in index order; every parameter must be bound.
    pub fn param_values(&self, drives: &Drives) -> Result<Vec<C64>> {
        self.params
            .iter()
            .map(|n| drives.get(n).copied().ok_or_else(|| Error::UnboundParameter(n.clone())))
            .collect()
    }

    /// Compiles an observable against this system's parameter ordering.
    pub fn compile_observable(&self, op: &ParametricOperator) -> Result<DrivenOperator> {
        self.space.check_same(op.space())?;
        let index: BTreeMap<String, usize> =
            self.params.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        DrivenOperator::compile(op, &index)
    }

    /// `H` and the collapse operators at fixed drives.
    pub fn evaluate(&self, drives: &Drives) -> Result<(Operator, Vec<Operator>)> {
        let v = self.param_values(drives)?;
        let h = if self.hamiltonian.terms.is_empty() {
            Operator::zeros(self.space.clone())
        } else {
            self.hamiltonian.evaluate(&v)
        };
        Ok((h, self.collapse.iter().map(|l| l.evaluate(&v)).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::annihilation;
    use crate::slh::expr::DriveExpr;

    #[test]
    fn effective_hamiltonian_matches_direct_formula() {
        let s = SpaceDescriptor::single(5).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let l = ParametricOperator::from_operator(a.scale(C64::new(2.0, 0.0)))
            .add(&ParametricOperator::scalar(s.clone(), DriveExpr::drive("x")))
            .unwrap();
        let h = ParametricOperator::term(&DriveExpr::drive("x"), &a.dagger())
            .add(&ParametricOperator::term(&DriveExpr::drive("x").conj(), &a))
            .unwrap();
        let sys = OpenSystem::new(s.clone(), &h, &[l.clone()]).unwrap();
        let x = C64::new(0.7, -1.1);
        let d: Drives = [("x".to_string(), x)].into();
        let v = sys.param_values(&d).unwrap();
        let got = sys.effective_hamiltonian().evaluate(&v);
        let le = l.evaluate(&d).unwrap();
        let expect = h
            .evaluate(&d)
            .unwrap()
            .add_scaled(&le.dagger().matmul(&le).unwrap(), C64::new(0.0, -0.5))
            .unwrap();
        assert!(got.sub(&expect).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn missing_drive_is_an_error() {
        let s = SpaceDescriptor::single(3).unwrap();
        let l = ParametricOperator::scalar(s.clone(), DriveExpr::drive("y"));
        let sys = OpenSystem::new(s.clone(), &ParametricOperator::zero(s), &[l]).unwrap();
        assert!(matches!(sys.param_values(&Drives::new()), Err(Error::UnboundParameter(_))));
    }
}
