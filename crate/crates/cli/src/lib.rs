// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Reproduction harness around the `kerrnet` library.
//!
//! Each subcommand of the `kerrnet` binary maps to one function in [`commands`]; the
//! numerical work lives in [`experiments`] and [`validate`] so tests can call it
//! without touching the file system.

pub mod commands;
pub mod config;
pub mod experiments;
pub mod manifest;
pub mod validate;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/harness.md")]
mod harness_chapter {}
