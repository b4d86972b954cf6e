// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures raised by operator algebra, network composition, dynamics and reduction.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("mode {mode} out of range for a space with {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },
    #[error("space mismatch: {left} vs {right}")]
    SpaceMismatch { left: String, right: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator is not Hermitian (defect {defect:.3e} > {tol:.3e})")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("channel count mismatch: {left} vs {right}")]
    ChannelMismatch { left: usize, right: usize },
    #[error("channel {index} out of range for a {channels}-channel network")]
    ChannelOutOfRange { index: usize, channels: usize },
    #[error("feedback is singular: |1 - S_kl| = {0:.3e}")]
    SingularFeedback(f64),
    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("scattering matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("unbound drive parameter `{0}`")]
    UnboundParameter(String),
    #[error("expression is not affine in the drive parameters: {0}")]
    NonAffine(String),
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("steady-state residual {residual:.3e} exceeds {tol:.3e}")]
    SteadyStateResidual { residual: f64, tol: f64 },
    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("trajectory norm underflow at t = {0}")]
    NormUnderflow(f64),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid reduction basis: {0}")]
    InvalidBasis(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
