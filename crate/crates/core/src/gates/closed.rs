// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Literal gate triples and compact master equations, written out term by term
//! without the composition engine. They serve as oracles for the composed networks.
//!
//! Drive amplitudes are complex here; for real drives the Hamiltonians reduce to the
//! familiar `i c (x a - x a^dagger)` form.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::factory::CavityFactory;
use super::params::{AndParams, LatchParams, NotParams};
use crate::error::Result;
use crate::fock::Operator;
use crate::slh::{CavityProvider, DriveExpr, ParametricOperator, SlhTriple};

const I: C64 = C64::new(0.0, 1.0);

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn op(a: &Operator, k: C64) -> ParametricOperator {
    ParametricOperator::from_operator(a.scale(k))
}

/// `x + k a` with a scalar drive expression `x`.
fn affine(f: &CavityFactory, x: DriveExpr, a: &Operator, k: C64) -> Result<ParametricOperator> {
    ParametricOperator::scalar(f.space().clone(), x).add(&op(a, k))
}

/// `i g (conj(x) a - x a^dagger)`: Hermitian drive term for amplitude `x`.
fn drive_term(x: &DriveExpr, a: &Operator, g: f64) -> Result<ParametricOperator> {
    ParametricOperator::term(&x.conj().scale(I * g), a).add(&ParametricOperator::term(&x.scale(-I * g), &a.dagger()))
}

fn block_diag(blocks: &[DMatrix<C64>]) -> DMatrix<C64> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = DMatrix::zeros(n, n);
    let mut o = 0;
    for b in blocks {
        m.view_mut((o, o), (b.nrows(), b.ncols())).copy_from(b);
        o += b.nrows();
    }
    m
}

fn and_input() -> DriveExpr {
    DriveExpr::drive("xi1").add(&DriveExpr::drive("xi2"))
}

/// AND gate triple with inputs `xi1`, `xi2`.
pub fn closed_form_and(f: &CavityFactory, p: &AndParams) -> Result<SlhTriple> {
    let (a, h0) = (f.lowering(0)?, f.bare_hamiltonian(0)?);
    let sk = f.kappa().sqrt();
    let r = FRAC_1_SQRT_2;
    let (ct, st) = (p.theta.cos(), p.theta.sin());
    let e = C64::from_polar(1.0, p.phi);
    #[rustfmt::skip]
    let s = DMatrix::from_row_slice(3, 3, &[
        c(r), c(-r), c(0.0),
        r * ct * e, r * ct * e, c(-st),
        r * st * e, r * st * e, c(ct),
    ]);
    let x = and_input();
    let diff = DriveExpr::drive("xi1").add(&DriveExpr::drive("xi2").scale(c(-1.0)));
    let l = vec![
        ParametricOperator::scalar(f.space().clone(), diff.scale(c(r))),
        affine(f, x.scale(r * ct * e), a, (ct * e - st) * sk)?,
        affine(f, x.scale(r * st * e), a, (st * e + ct) * sk)?,
    ];
    let h = ParametricOperator::from_operator(h0.clone()).add(&drive_term(&x, a, sk * r / 2.0)?)?;
    SlhTriple::new(f.space().clone(), s, l, h)
}

/// NOT gate triple with input `xi`.
pub fn closed_form_not(f: &CavityFactory, p: &NotParams) -> Result<SlhTriple> {
    let (a, h0) = (f.lowering(0)?, f.bare_hamiltonian(0)?);
    let sk = f.kappa().sqrt();
    let r = FRAC_1_SQRT_2;
    let (ct, st) = (p.theta.cos(), p.theta.sin());
    let (ctp, stp) = (p.theta_p.cos(), p.theta_p.sin());
    let ep = C64::from_polar(1.0, p.phi_p);
    let minus = (-1.0 - ep * stp) / 2.0;
    let plus = (1.0 - ep * stp) / 2.0;
    #[rustfmt::skip]
    let s1 = DMatrix::from_row_slice(3, 3, &[
        minus, plus, ep * ctp * r,
        plus, minus, ep * ctp * r,
        c(ctp * r), c(ctp * r), c(stp),
    ]);
    #[rustfmt::skip]
    let s2 = DMatrix::from_row_slice(2, 2, &[c(ct), c(-st), c(st), c(ct)]);
    let xi = DriveExpr::drive("xi");
    let al = DriveExpr::constant(c(p.alpha));
    let bias = DriveExpr::constant(ep * ctp * r * p.beta_p);
    let k1 = -sk * ep * stp * r;
    let l = vec![
        affine(f, xi.scale(minus).add(&al.scale(plus)).add(&bias), a, k1)?,
        affine(f, xi.scale(plus).add(&al.scale(minus)).add(&bias), a, k1)?,
        affine(
            f,
            xi.add(&al).scale(c(ctp * r)).add(&DriveExpr::constant(stp * p.beta_p)),
            a,
            c(sk * ctp),
        )?,
        affine(f, DriveExpr::constant(p.beta * ct), a, c(-sk * st))?,
        affine(f, DriveExpr::constant(p.beta * st), a, c(sk * ct))?,
    ];
    let h = ParametricOperator::from_operator(h0.clone()).add(&drive_term(&xi.add(&al), a, sk * r / 2.0)?)?;
    SlhTriple::new(f.space().clone(), block_diag(&[s1, s2]), l, h)
}

fn latch_bias(p: &LatchParams) -> C64 {
    p.beta * p.theta.cos() * C64::from_polar(1.0, p.phi)
}

/// NAND latch triple on cavities 0 (`a`) and 1 (`b`) with inputs `s_bar`, `r_bar`.
pub fn closed_form_latch(f: &CavityFactory, p: &LatchParams) -> Result<SlhTriple> {
    let (a, b) = (f.lowering(0)?, f.lowering(1)?);
    let kappa = f.kappa();
    let sk = kappa.sqrt();
    let r = FRAC_1_SQRT_2;
    let (ct, st) = (p.theta.cos(), p.theta.sin());
    let e = C64::from_polar(1.0, p.phi);
    #[rustfmt::skip]
    let s1 = DMatrix::from_row_slice(3, 3, &[
        c(r), -r * ct * e, r * st * e,
        c(r), r * ct * e, -r * st * e,
        c(0.0), c(st), c(ct),
    ]);
    let bias = latch_bias(p);
    let sbar = DriveExpr::drive("s_bar");
    let rbar = DriveExpr::drive("r_bar");
    let cross = sk * r * st * e;
    let mut l = Vec::with_capacity(6);
    for (x, own, other) in [(&sbar, a, b), (&rbar, b, a)] {
        l.push(affine(f, x.scale(c(r)).add(&DriveExpr::constant(-r * bias)), other, cross)?);
        l.push(affine(f, x.scale(c(r)).add(&DriveExpr::constant(r * bias)), other, -cross)?.add(&op(own, c(sk)))?);
        l.push(affine(f, DriveExpr::constant(p.beta * st), other, c(sk * ct))?);
    }
    let h = latch_hamiltonian(f, p, sk * r / 2.0)?;
    SlhTriple::new(f.space().clone(), block_diag(&[s1.clone(), s1]), l, h)
}

/// `H0a + H0b - (κ/√2) sin θ sin φ (a b† + a† b)` plus drive terms of strength `g`.
fn latch_hamiltonian(f: &CavityFactory, p: &LatchParams, g: f64) -> Result<ParametricOperator> {
    let (a, b) = (f.lowering(0)?, f.lowering(1)?);
    let coupling = -f.kappa() * FRAC_1_SQRT_2 * p.theta.sin() * p.phi.sin();
    let hop = a.matmul(&b.dagger())?.add(&a.dagger().matmul(b)?)?.scale(c(coupling));
    let bias = DriveExpr::constant(latch_bias(p));
    let mut h = ParametricOperator::from_operator(f.bare_hamiltonian(0)?.add(f.bare_hamiltonian(1)?)?.add(&hop)?);
    h = h.add(&drive_term(&DriveExpr::drive("s_bar").add(&bias), a, g)?)?;
    h.add(&drive_term(&DriveExpr::drive("r_bar").add(&bias), b, g)?)
}

/// Hamiltonian and collapse operators of the compact single-cavity master equation
/// for total input amplitude `x`: `H0 + i sqrt(κ/2)(conj(x) a - x a†)`, `L = sqrt(2κ) a`.
fn single_cavity_compact(f: &CavityFactory, x: &DriveExpr) -> Result<(ParametricOperator, Vec<ParametricOperator>)> {
    let (a, h0) = (f.lowering(0)?, f.bare_hamiltonian(0)?);
    let g = (f.kappa() / 2.0).sqrt();
    let h = ParametricOperator::from_operator(h0.clone()).add(&drive_term(x, a, g)?)?;
    Ok((h, vec![op(a, c((2.0 * f.kappa()).sqrt()))]))
}

pub fn compact_and(f: &CavityFactory) -> Result<(ParametricOperator, Vec<ParametricOperator>)> {
    single_cavity_compact(f, &and_input())
}

pub fn compact_not(f: &CavityFactory, p: &NotParams) -> Result<(ParametricOperator, Vec<ParametricOperator>)> {
    single_cavity_compact(f, &DriveExpr::drive("xi").add(&DriveExpr::constant(c(p.alpha))))
}

/// Latch master equation with the four collapse operators of the coupled pair.
pub fn compact_latch(f: &CavityFactory, p: &LatchParams) -> Result<(ParametricOperator, Vec<ParametricOperator>)> {
    let (a, b) = (f.lowering(0)?, f.lowering(1)?);
    let kappa = f.kappa();
    let ct = p.theta.cos();
    let own = (kappa / 2.0 * (1.0 + ct * ct)).sqrt();
    let cross = (kappa / 2.0).sqrt() * p.theta.sin() * C64::from_polar(1.0, p.phi);
    let sk = kappa.sqrt();
    let h = latch_hamiltonian(f, p, (kappa / 2.0).sqrt())?;
    let l = vec![
        op(a, c(own)),
        op(a, cross).add(&op(b, c(-sk)))?,
        op(b, c(own)),
        op(b, cross).add(&op(a, c(-sk)))?,
    ];
    Ok((h, l))
}
