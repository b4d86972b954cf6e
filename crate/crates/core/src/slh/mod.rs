// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! SLH triples, their composition rules and the components the gates are built from.
//!
//! Operators are affine in named drive amplitudes, so a composed network stays
//! symbolic in its inputs and can be evaluated at any drive setting.

mod expr;
mod network;
mod open;
mod triple;

pub use expr::{DriveExpr, DriveKey, Drives, ParametricOperator};
pub use network::{parse_expr, CavityProvider, ComponentSpec, Expr, NetworkDescription, Value};
pub use open::{DrivenOperator, Monomial, OpenSystem};
pub use triple::{
    beamsplitter, cavity_from_ops, cavity_halves_from_ops, displacement, identity_network,
    kerr_cavity, permutation, phase_shifter, ConcreteSlh, SlhTriple, FEEDBACK_TOL, UNITARY_TOL,
};

/// Drive map from `(name, value)` pairs.
pub fn drives<S: Into<String>>(pairs: impl IntoIterator<Item = (S, num_complex::Complex64)>) -> Drives {
    pairs.into_iter().map(|(k, v)| (k.into(), v)).collect()
}
