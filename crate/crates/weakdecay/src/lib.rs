// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

//! File formats, experiment configs and command implementations for the
//! `weakdecay` tool. Numerics live in `weakdecay-core`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod validate;

pub use commands::{RunOptions, DEFAULT_TOL};
pub use error::{CliError, CliResult};
pub use weakdecay_core as core;
