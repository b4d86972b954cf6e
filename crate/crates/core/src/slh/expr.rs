// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{Operator, SpaceDescriptor};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Values of the named drive amplitudes.
pub type Drives = BTreeMap<String, C64>;

/// A drive amplitude `x` or its conjugate `x*`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DriveKey {
    pub name: String,
    pub conj: bool,
}

impl DriveKey {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), conj: false }
    }

    pub fn conjugated(&self) -> Self {
        Self { name: self.name.clone(), conj: !self.conj }
    }

    pub fn eval(&self, drives: &Drives) -> Result<C64> {
        let v = drives.get(&self.name).ok_or_else(|| Error::UnboundParameter(self.name.clone()))?;
        Ok(if self.conj { v.conj() } else { *v })
    }
}

impl fmt::Display for DriveKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.conj {
            write!(f, "{}*", self.name)
        } else {
            write!(f, "{}", self.name)
        }
    }
}

/// Complex scalar affine in the drive amplitudes and their conjugates:
/// `constant + sum_k coeff_k * key_k`. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DriveExpr {
    constant: C64,
    linear: BTreeMap<DriveKey, C64>,
}

impl DriveExpr {
    pub fn constant(c: C64) -> Self {
        Self { constant: c, linear: BTreeMap::new() }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// The drive amplitude `name` with unit coefficient.
    pub fn drive(name: impl Into<String>) -> Self {
        Self::term(DriveKey::new(name), ONE)
    }

    pub fn term(key: DriveKey, coeff: C64) -> Self {
        let mut e = Self::zero();
        if coeff != ZERO {
            e.linear.insert(key, coeff);
        }
        e
    }

    pub fn constant_part(&self) -> C64 {
        self.constant
    }

    pub fn linear_terms(&self) -> impl Iterator<Item = (&DriveKey, C64)> {
        self.linear.iter().map(|(k, &v)| (k, v))
    }

    pub fn coeff(&self, key: &DriveKey) -> C64 {
        self.linear.get(key).copied().unwrap_or(ZERO)
    }

    pub fn is_constant(&self) -> bool {
        self.linear.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.constant == ZERO && self.linear.is_empty()
    }

    pub fn add(&self, other: &DriveExpr) -> DriveExpr {
        let mut out = self.clone();
        out.constant += other.constant;
        for (k, &v) in &other.linear {
            let e = out.linear.entry(k.clone()).or_insert(ZERO);
            *e += v;
            if *e == ZERO {
                out.linear.remove(k);
            }
        }
        out
    }

    pub fn scale(&self, c: C64) -> DriveExpr {
        if c == ZERO {
            return Self::zero();
        }
        Self {
            constant: self.constant * c,
            linear: self.linear.iter().map(|(k, &v)| (k.clone(), v * c)).collect(),
        }
    }

    /// Complex conjugate; `x` and `x*` swap roles.
    pub fn conj(&self) -> DriveExpr {
        Self {
            constant: self.constant.conj(),
            linear: self.linear.iter().map(|(k, &v)| (k.conjugated(), v.conj())).collect(),
        }
    }

    /// Product of two expressions; fails when both depend on drives.
    pub fn mul(&self, other: &DriveExpr) -> Result<DriveExpr> {
        if !self.is_constant() && !other.is_constant() {
            return Err(Error::NonAffine(format!("({self}) * ({other})")));
        }
        if self.is_constant() {
            Ok(other.scale(self.constant))
        } else {
            Ok(self.scale(other.constant))
        }
    }

    pub fn eval(&self, drives: &Drives) -> Result<C64> {
        let mut s = self.constant;
        for (k, &v) in &self.linear {
            s += v * k.eval(drives)?;
        }
        Ok(s)
    }

    pub fn params(&self) -> BTreeSet<String> {
        self.linear.keys().map(|k| k.name.clone()).collect()
    }
}

impl fmt::Display for DriveExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constant)?;
        for (k, v) in &self.linear {
            write!(f, " + ({v})*{k}")?;
        }
        Ok(())
    }
}

/// Operator affine in the drive amplitudes:
/// `scalar * I + constant + sum_k key_k * linear_k`.
///
/// The identity part is kept separate so that it can be dropped from Hamiltonians
/// without materialising it.
#[derive(Clone, Debug, PartialEq)]
pub struct ParametricOperator {
    space: SpaceDescriptor,
    scalar: DriveExpr,
    constant: Operator,
    linear: BTreeMap<DriveKey, Operator>,
}

impl ParametricOperator {
    pub fn zero(space: SpaceDescriptor) -> Self {
        Self {
            constant: Operator::zeros(space.clone()),
            space,
            scalar: DriveExpr::zero(),
            linear: BTreeMap::new(),
        }
    }

    pub fn from_operator(op: Operator) -> Self {
        let mut p = Self::zero(op.space().clone());
        p.constant = op;
        p
    }

    /// `expr * I`.
    pub fn scalar(space: SpaceDescriptor, expr: DriveExpr) -> Self {
        let mut p = Self::zero(space);
        p.scalar = expr;
        p
    }

    /// `expr * op`.
    pub fn term(expr: &DriveExpr, op: &Operator) -> Self {
        let mut p = Self::zero(op.space().clone());
        p.add_term(expr, Some(op)).expect("space matches");
        p
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn scalar_part(&self) -> &DriveExpr {
        &self.scalar
    }

    pub fn constant_part(&self) -> &Operator {
        &self.constant
    }

    pub fn linear_parts(&self) -> impl Iterator<Item = (&DriveKey, &Operator)> {
        self.linear.iter()
    }

    pub fn params(&self) -> BTreeSet<String> {
        let mut p = self.scalar.params();
        p.extend(self.linear.keys().map(|k| k.name.clone()));
        p
    }

    /// Adds `expr * op`, or `expr * I` when `op` is `None`.
    fn add_term(&mut self, expr: &DriveExpr, op: Option<&Operator>) -> Result<()> {
        let Some(op) = op else {
            self.scalar = self.scalar.add(expr);
            return Ok(());
        };
        self.space.check_same(op.space())?;
        if op.nnz() == 0 {
            return Ok(());
        }
        if expr.constant_part() != ZERO {
            self.constant = self.constant.add_scaled(op, expr.constant_part())?;
        }
        for (k, c) in expr.linear_terms() {
            let updated = match self.linear.get(k) {
                Some(cur) => cur.add_scaled(op, c)?,
                None => op.scale(c),
            };
            if updated.nnz() == 0 {
                self.linear.remove(k);
            } else {
                self.linear.insert(k.clone(), updated);
            }
        }
        Ok(())
    }

    /// The operator as a list of `(coefficient, operator)` pairs, `None` standing for I.
    fn terms(&self) -> Vec<(DriveExpr, Option<&Operator>)> {
        let mut t = Vec::with_capacity(self.linear.len() + 2);
        if !self.scalar.is_zero() {
            t.push((self.scalar.clone(), None));
        }
        if self.constant.nnz() > 0 {
            t.push((DriveExpr::constant(ONE), Some(&self.constant)));
        }
        for (k, op) in &self.linear {
            t.push((DriveExpr::term(k.clone(), ONE), Some(op)));
        }
        t
    }

    pub fn add(&self, other: &ParametricOperator) -> Result<Self> {
        self.space.check_same(&other.space)?;
        let mut out = self.clone();
        for (e, op) in other.terms() {
            out.add_term(&e, op)?;
        }
        Ok(out)
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &ParametricOperator, c: C64) -> Result<Self> {
        self.add(&other.scale(c))
    }

    pub fn scale(&self, c: C64) -> Self {
        if c == ZERO {
            return Self::zero(self.space.clone());
        }
        Self {
            space: self.space.clone(),
            scalar: self.scalar.scale(c),
            constant: self.constant.scale(c),
            linear: self.linear.iter().map(|(k, op)| (k.clone(), op.scale(c))).collect(),
        }
    }

    pub fn dagger(&self) -> Self {
        Self {
            space: self.space.clone(),
            scalar: self.scalar.conj(),
            constant: self.constant.dagger(),
            linear: self.linear.iter().map(|(k, op)| (k.conjugated(), op.dagger())).collect(),
        }
    }

    /// `self^dagger * other` with the identity component discarded.
    ///
    /// Only used inside Hamiltonian corrections, where identity terms are global phases.
    pub fn adjoint_mul_traceless(&self, other: &ParametricOperator) -> Result<Self> {
        self.space.check_same(&other.space)?;
        let left = self.dagger();
        let mut out = Self::zero(self.space.clone());
        for (e1, o1) in left.terms() {
            for (e2, o2) in other.terms() {
                let prod;
                let op = match (o1, o2) {
                    (None, None) => continue,
                    (Some(a), None) => a,
                    (None, Some(b)) => b,
                    (Some(a), Some(b)) => {
                        prod = a.matmul(b)?;
                        &prod
                    }
                };
                out.add_term(&e1.mul(&e2)?, Some(op))?;
            }
        }
        Ok(out)
    }

    /// `(X - X^dagger) / 2i`.
    pub fn imag_part(&self) -> Self {
        let diff = self.add(&self.dagger().scale(C64::new(-1.0, 0.0))).expect("same space");
        diff.scale(C64::new(0.0, -0.5))
    }

    /// Operator at the given drive values.
    pub fn evaluate(&self, drives: &Drives) -> Result<Operator> {
        let mut out = self.constant.clone();
        let s = self.scalar.eval(drives)?;
        if s != ZERO {
            out = out.add_scaled(&Operator::identity(self.space.clone()), s)?;
        }
        for (k, op) in &self.linear {
            out = out.add_scaled(op, k.eval(drives)?)?;
        }
        Ok(out)
    }

    /// Same operator without its identity component.
    pub fn without_identity(&self) -> Self {
        let mut out = self.clone();
        out.scalar = DriveExpr::zero();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::annihilation;

    fn drives(pairs: &[(&str, C64)]) -> Drives {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn conjugation_flips_keys() {
        let e = DriveExpr::drive("x").scale(C64::new(0.0, 2.0)).add(&DriveExpr::constant(ONE));
        let d = drives(&[("x", C64::new(1.0, 3.0))]);
        assert!((e.conj().eval(&d).unwrap() - e.eval(&d).unwrap().conj()).norm() < 1e-15);
    }

    #[test]
    fn quadratic_products_are_rejected() {
        let x = DriveExpr::drive("x");
        assert!(matches!(x.mul(&x), Err(Error::NonAffine(_))));
        assert!(x.mul(&DriveExpr::constant(ONE)).is_ok());
    }

    #[test]
    fn unbound_parameter_is_reported() {
        let s = SpaceDescriptor::single(3).unwrap();
        let p = ParametricOperator::scalar(s, DriveExpr::drive("eps"));
        assert!(matches!(p.evaluate(&Drives::new()), Err(Error::UnboundParameter(n)) if n == "eps"));
    }

    #[test]
    fn adjoint_product_drops_identity_and_matches_dense() {
        let s = SpaceDescriptor::single(4).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let p = ParametricOperator::term(&DriveExpr::constant(C64::new(0.5, 0.0)), &a)
            .add(&ParametricOperator::scalar(s.clone(), DriveExpr::drive("x")))
            .unwrap();
        let q = ParametricOperator::from_operator(a.dagger())
            .add(&ParametricOperator::scalar(s.clone(), DriveExpr::constant(C64::new(2.0, 1.0))))
            .unwrap();
        let d = drives(&[("x", C64::new(0.3, -0.7))]);
        let got = p.adjoint_mul_traceless(&q).unwrap().evaluate(&d).unwrap();
        let pe = p.evaluate(&d).unwrap();
        let qe = q.evaluate(&d).unwrap();
        let full = pe.dagger().matmul(&qe).unwrap();
        let id_coeff = d["x"].conj() * C64::new(2.0, 1.0);
        let expect = full.add_scaled(&Operator::identity(s), -id_coeff).unwrap();
        assert!(got.sub(&expect).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn imag_part_is_hermitian() {
        let s = SpaceDescriptor::single(5).unwrap();
        let a = annihilation(&s, 0).unwrap();
        let p = ParametricOperator::term(&DriveExpr::drive("x"), &a);
        let h = p.imag_part();
        let op = h.evaluate(&drives(&[("x", C64::new(1.2, 0.4))])).unwrap();
        assert!(op.hermiticity_defect() < 1e-15);
    }
}
