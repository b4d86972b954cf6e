// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Truncated Fock spaces, sparse operators and quantum states.
//!
//! Multi-mode spaces are tensor products ordered mode 0 first, so the basis index of
//! `|n_0, n_1, ...>` is `n_0 * (D_1 * D_2 * ...) + n_1 * (D_2 * ...) + ...`.

mod io;
mod operator;
mod space;
mod state;

pub use io::{read_matrix, write_matrix, MatrixStorage};
pub use operator::{
    annihilation, creation, hermitian_eig, kerr_hamiltonian, number, HermitianEig, Operator,
};
pub use space::SpaceDescriptor;
pub use state::{QuantumState, StateValidity, STATE_TOL};
