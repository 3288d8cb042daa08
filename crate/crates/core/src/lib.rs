// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

//! Numerical core for weak-measurement correlations of decaying quantum
//! states.
//!
//! A local state |Ω⟩ leaks into a continuum through a coupling profile
//! |V(k)|². Weak (noninvasive) measurement of the projector Â = |Ω⟩⟨Ω|
//! produces a conditional average ⟨a(0)||a(t)⟩ that exceeds the classical
//! bound 1 at short times. This crate computes that quantity two ways:
//!
//! * [`perturb`]: lowest-order formulas for arbitrary spectral densities,
//!   including finite measurement strength λ.
//! * [`pseudomode`]: the exact Lorentzian model reduced to a 3×3 real
//!   Liouvillian, propagated with a Cayley–Hamilton closed form.
//!
//! [`oracle`] holds independent reference solvers (dense matrix
//! exponential, the full 4×4 superoperator, a Volterra survival-amplitude
//! integrator) used to cross-check both branches, and [`lg`] evaluates the
//! Leggett-Garg-type margins and classical null models.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod curve;
pub mod error;
pub mod lg;
pub mod oracle;
pub mod perturb;
pub mod pseudomode;
pub mod quad;
pub mod special;
pub mod spectral;

pub use curve::{Branch, CorrelationCurve};
pub use error::{Error, Result};
pub use num_complex::Complex64;
