// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Model reduction of single Kerr modes.
//!
//! A driven and an undriven steady state are jointly diagonalised; the joint
//! eigenvectors carrying the most population span the reduced space. Plain Fock
//! truncation is the baseline.

mod basis;
mod fidelity;
mod jade;

pub use basis::{
    build_basis, embed_fock_state, embed_jade_state, fock_truncation_basis, reduce_operator,
    reduced_kerr_cavity, BlockConvention, ReducedCavity, ReductionBasis,
};
pub use fidelity::fidelity;
pub use jade::{jade, off, JadeOptions, JadeResult};
