// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Kerr-cavity photonic logic networks.
//!
//! - [`fock`]: truncated Fock spaces, sparse operators, states.
//! - [`slh`]: SLH triples, composition, network descriptions, Lindblad generators.
//! - [`dynamics`]: steady states, master-equation and quantum-trajectory evolution.
//! - [`reduction`]: JADE-based cavity bases, reduced operators, fidelity.
//! - [`gates`]: AND, NOT and latch circuits with closed-form oracles.

pub mod error;
pub mod fock;
pub mod linalg;
pub mod slh;
pub mod dynamics;
pub mod reduction;
pub mod gates;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/fock.md")]
    mod fock {}
    #[doc = include_str!("../../../book/src/slh.md")]
    mod slh {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/reduction.md")]
    mod reduction {}
    #[doc = include_str!("../../../book/src/gates.md")]
    mod gates {}
}
