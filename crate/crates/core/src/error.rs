// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

use alloc::string::String;
use core::fmt;

use num_complex::Complex64;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failure modes of the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A model or algorithm parameter lies outside its domain.
    ParameterDomain { what: String },
    /// Adaptive quadrature hit its subdivision cap. `estimate` is the best
    /// value obtained (real integrals have a zero imaginary part).
    Integration {
        estimate: Complex64,
        error_estimate: f64,
        evaluations: usize,
    },
    /// Principal-value extrapolation diverged: the singularity is not a
    /// simple pole.
    PoleOrder { pole: f64 },
    /// A fixed-point iteration failed to contract.
    Convergence {
        last: Complex64,
        previous: Complex64,
        iterations: usize,
    },
    /// No sign change of the root function on the search interval.
    Bracketing { lower: f64, upper: f64 },
    /// The stationary pseudomode state does not exist (zero coupling).
    DegenerateState,
    /// The Cayley–Hamilton interpolation denominator vanished.
    DegenerateSpectrum { denominator: f64 },
    /// ⟨ψ̃|ψ⟩ is too small to divide by.
    IllConditionedOverlap { overlap: Complex64 },
    /// A query point or a matrix norm lies outside the representable range.
    Range { what: String },
    /// The Volterra integrator produced a growing amplitude.
    StepSize { time: f64, magnitude: f64 },
    /// A sampling grid does not cover what it must.
    Domain { what: String },
}

impl Error {
    pub(crate) fn domain_param(what: impl Into<String>) -> Self {
        Error::ParameterDomain { what: what.into() }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ParameterDomain { what } => write!(f, "parameter out of domain: {what}"),
            Error::Integration {
                estimate,
                error_estimate,
                evaluations,
            } => write!(
                f,
                "integration failed to converge after {evaluations} evaluations \
                 (best estimate {estimate}, error estimate {error_estimate:e})"
            ),
            Error::PoleOrder { pole } => {
                write!(f, "principal value diverges at {pole}: singularity is not a simple pole")
            }
            Error::Convergence {
                last,
                previous,
                iterations,
            } => write!(
                f,
                "fixed-point iteration did not converge in {iterations} steps \
                 (last iterates {previous} -> {last})"
            ),
            Error::Bracketing { lower, upper } => {
                write!(f, "no sign change on [{lower}, {upper}]")
            }
            Error::DegenerateState => write!(f, "stationary state is degenerate (r = q)"),
            Error::DegenerateSpectrum { denominator } => write!(
                f,
                "degenerate Liouvillian spectrum (interpolation denominator {denominator:e})"
            ),
            Error::IllConditionedOverlap { overlap } => {
                write!(f, "overlap <psi~|psi> = {overlap} is too small")
            }
            Error::Range { what } => write!(f, "out of range: {what}"),
            Error::StepSize { time, magnitude } => write!(
                f,
                "survival amplitude grew to {magnitude} at t = {time}; reduce the step"
            ),
            Error::Domain { what } => write!(f, "domain error: {what}"),
        }
    }
}

impl core::error::Error for Error {}
