// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered list of per-mode truncation dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    mode_dims: Vec<usize>,
}

impl SpaceDescriptor {
    /// Builds a space; every mode needs dimension at least 1.
    pub fn new(mode_dims: Vec<usize>) -> Result<Self> {
        if mode_dims.is_empty() {
            return Err(Error::InvalidSpace("a space needs at least one mode".into()));
        }
        if let Some(m) = mode_dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidSpace(format!("mode {m} has dimension 0")));
        }
        Ok(Self { mode_dims })
    }

    /// Single mode truncated to `dim` levels.
    pub fn single(dim: usize) -> Result<Self> {
        Self::new(vec![dim])
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn modes(&self) -> usize {
        self.mode_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.mode_dims.iter().product()
    }

    /// Product space `self ⊗ other`.
    pub fn tensor(&self, other: &SpaceDescriptor) -> SpaceDescriptor {
        let mut dims = self.mode_dims.clone();
        dims.extend_from_slice(&other.mode_dims);
        SpaceDescriptor { mode_dims: dims }
    }

    /// Stride of `mode` in the flattened basis index.
    pub(crate) fn stride(&self, mode: usize) -> usize {
        self.mode_dims[mode + 1..].iter().product()
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes() {
            return Err(Error::ModeOutOfRange { mode, modes: self.modes() });
        }
        Ok(())
    }

    pub(crate) fn check_same(&self, other: &SpaceDescriptor) -> Result<()> {
        if self != other {
            return Err(Error::SpaceMismatch { left: self.to_string(), right: other.to_string() });
        }
        Ok(())
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.mode_dims)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_zero_modes() {
        assert!(SpaceDescriptor::new(vec![]).is_err());
        assert!(SpaceDescriptor::new(vec![3, 0]).is_err());
    }

    #[test]
    fn strides_follow_mode_order() {
        let s = SpaceDescriptor::new(vec![2, 3, 4]).unwrap();
        assert_eq!(s.total_dim(), 24);
        assert_eq!(s.stride(0), 12);
        assert_eq!(s.stride(1), 4);
        assert_eq!(s.stride(2), 1);
        assert_eq!(s.tensor(&s).mode_dims(), &[2, 3, 4, 2, 3, 4]);
    }
}
