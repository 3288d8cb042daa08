// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact solver for the single-pole Lorentzian reservoir.
//!
//! The reservoir α q/(k² + q²) is replaced by one auxiliary level with
//! complex energy −iq, coupled to |Ω⟩ with strength α̃. Under continuous
//! measurement of |Ω⟩⟨Ω| at strength λ the symmetric part of the 2×2
//! density matrix evolves under a real 3×3 generator Ľ acting on
//! (X, Y, Z) = (ρ₀₀, i√2ρ₀₁, ρ₁₁).
//!
//! With Ľ' = Ľ + q the spectrum is {r, −s ± Δ}, s = (λ + r)/2, where r is
//! the real root in [0, q] of (λ + r)(q² − r²) = 4α̃² r. The slow
//! occupation decay rate is q − r.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::curve::{Branch, CorrelationCurve};
use crate::error::{Error, Result};
use crate::special::{cosh_sq, exp_divided_difference_series, sinh_over_sq};

/// α̃² = c·α with the constant as printed.
pub const CONVENTION_PRINTED: f64 = PI;

/// The constant that makes the pseudomode reproduce the perturbative branch
/// when k-integrals carry 1/2π.
pub const CONVENTION_RECONCILED: f64 = 0.5;

/// Below this interpolation denominator the Cayley–Hamilton closed form is
/// rejected.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-14;

/// Real 3×3 matrix, row-major.
pub type Matrix3 = [[f64; 3]; 3];

const SERIES_REACH: f64 = 2.0;
const BISECTION_STEPS: usize = 200;

/// Model inputs. `c_conv` fixes α̃² = c_conv·α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudomodeParams {
    pub alpha: f64,
    pub q: f64,
    pub lambda: f64,
    pub c_conv: f64,
}

impl PseudomodeParams {
    /// Parameters with the printed convention constant π.
    pub fn new(alpha: f64, q: f64, lambda: f64) -> Result<Self> {
        Self::with_convention(alpha, q, lambda, CONVENTION_PRINTED)
    }

    pub fn with_convention(alpha: f64, q: f64, lambda: f64, c_conv: f64) -> Result<Self> {
        let p = PseudomodeParams {
            alpha,
            q,
            lambda,
            c_conv,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters specified through 4α̃²/q² instead of α.
    pub fn from_coupling_ratio(ratio: f64, q: f64, lambda: f64, c_conv: f64) -> Result<Self> {
        if !(c_conv > 0.0 && c_conv.is_finite()) {
            return Err(Error::domain_param("convention constant must be positive"));
        }
        Self::with_convention(ratio * q * q / (4.0 * c_conv), q, lambda, c_conv)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.alpha.is_finite() && self.q.is_finite() && self.lambda.is_finite();
        if !finite {
            return Err(Error::domain_param("pseudomode parameters must be finite"));
        }
        if self.alpha < 0.0 {
            return Err(Error::domain_param("alpha must be nonnegative"));
        }
        if !(self.q > 0.0) {
            return Err(Error::domain_param("q must be positive"));
        }
        if self.lambda < 0.0 {
            return Err(Error::domain_param("lambda must be nonnegative"));
        }
        if !(self.c_conv > 0.0 && self.c_conv.is_finite()) {
            return Err(Error::domain_param("convention constant must be positive"));
        }
        Ok(())
    }

    pub fn alpha_tilde_sq(&self) -> f64 {
        self.c_conv * self.alpha
    }

    pub fn alpha_tilde(&self) -> f64 {
        self.alpha_tilde_sq().sqrt()
    }

    /// 4α̃²/q², the horizontal axis of the coupling scans.
    pub fn coupling_ratio(&self) -> f64 {
        4.0 * self.alpha_tilde_sq() / (self.q * self.q)
    }

    /// (λ + r)(q² − r²) − 4α̃² r; zero at the slow root.
    pub fn cubic_residual(&self, r: f64) -> f64 {
        (self.lambda + r) * (self.q * self.q - r * r) - 4.0 * self.alpha_tilde_sq() * r
    }

    fn snapshot(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        m.insert("alpha".into(), self.alpha);
        m.insert("q".into(), self.q);
        m.insert("lambda".into(), self.lambda);
        m.insert("c_conv".into(), self.c_conv);
        m
    }
}

/// The slow root r ∈ [0, q].
///
/// At λ = 0 the root is √(q² − 4α̃²) below the threshold and 0 above it
/// (the λ → 0⁺ limit). For λ > 0 it is bracketed by f(0) = λq² > 0 and
/// f(q) = −4α̃²q < 0, bisected and polished with Newton steps.
pub fn solve_r(params: &PseudomodeParams) -> Result<f64> {
    params.validate()?;
    let q = params.q;
    let a2 = params.alpha_tilde_sq();
    if a2 == 0.0 {
        return Ok(q);
    }
    if params.lambda == 0.0 {
        return Ok((q * q - 4.0 * a2).max(0.0).sqrt());
    }
    let f = |r: f64| params.cubic_residual(r);
    let (mut lo, mut hi) = (0.0, q);
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo > 0.0 && fhi < 0.0) {
        return Err(Error::Bracketing { lower: lo, upper: hi });
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r = 0.5 * (lo + hi);
    let lam = params.lambda;
    for _ in 0..3 {
        let df = (q * q - r * r) - 2.0 * r * (lam + r) - 4.0 * a2;
        if df == 0.0 {
            break;
        }
        let next = r - f(r) / df;
        if !(next >= 0.0 && next <= q) || f(next).abs() >= f(r).abs() {
            break;
        }
        r = next;
    }
    Ok(r)
}

/// Spectral data shared by the propagator and the conditional average.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Spectrum {
    r: f64,
    /// (λ + r)/2
    s: f64,
    /// product of the two non-r eigenvalues of Ľ'
    p: f64,
    /// Δ² = s² − p
    delta_sq: f64,
}

impl Spectrum {
    fn new(params: &PseudomodeParams, r: f64) -> Self {
        let s = 0.5 * (params.lambda + r);
        // at λ = 0 below threshold r² = q² − 4α̃², so p vanishes exactly
        let p = if params.lambda == 0.0 && r > 0.0 {
            0.0
        } else {
            4.0 * params.alpha_tilde_sq() - params.q * params.q + r * (params.lambda + r)
        };
        Spectrum {
            r,
            s,
            p,
            delta_sq: s * s - p,
        }
    }

    fn delta(&self) -> Complex64 {
        Complex64::new(self.delta_sq, 0.0).sqrt()
    }

    fn eigenvalues(&self) -> [Complex64; 3] {
        let d = self.delta();
        let lower = Complex64::new(-self.s, 0.0) - d;
        let upper = if self.delta_sq > 0.0 && self.p >= 0.0 {
            // −s + Δ = −p/(s + Δ) without cancellation
            Complex64::new(-self.p / (self.s + d.re), 0.0)
        } else {
            Complex64::new(-self.s, 0.0) + d
        };
        [Complex64::new(self.r, 0.0), upper, lower]
    }

    fn denominator(&self) -> f64 {
        2.0 * self.r * self.r + self.r * (2.0 * self.s - self.r) + self.p
    }
}

/// Ľ with its slow root and the spectrum of Ľ' = Ľ + q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedLiouvillian {
    pub matrix: Matrix3,
    pub r: f64,
    pub eigenvalues: [Complex64; 3],
}

impl ReducedLiouvillian {
    pub fn trace(&self) -> f64 {
        self.matrix[0][0] + self.matrix[1][1] + self.matrix[2][2]
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        mat_vec(&self.matrix, v)
    }
}

/// The generator Ľ for given parameters (independent of r).
pub fn liouvillian_matrix(params: &PseudomodeParams) -> Matrix3 {
    let g = SQRT_2 * params.alpha_tilde();
    let q = params.q;
    [
        [0.0, g, 0.0],
        [-g, -params.lambda - q, g],
        [0.0, -g, -2.0 * q],
    ]
}

pub fn build_liouvillian(params: &PseudomodeParams) -> Result<ReducedLiouvillian> {
    let r = solve_r(params)?;
    Ok(ReducedLiouvillian {
        matrix: liouvillian_matrix(params),
        r,
        eigenvalues: Spectrum::new(params, r).eigenvalues(),
    })
}

/// Symmetric reduced density matrix (X, Y, Z) = (ρ₀₀, i√2ρ₀₁, ρ₁₁).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ReducedState {
    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        ReducedState {
            x: v[0],
            y: v[1],
            z: v[2],
        }
    }

    /// Ǎ = {Â, ·}/2 in reduced coordinates.
    pub fn measured(&self) -> Self {
        ReducedState {
            x: self.x,
            y: 0.5 * self.y,
            z: 0.0,
        }
    }
}

fn stationary_from_root(params: &PseudomodeParams, r: f64) -> Result<ReducedState> {
    let q = params.q;
    if q - r < 1e-12 {
        return Err(Error::DegenerateState);
    }
    let g = SQRT_2 * params.alpha_tilde();
    Ok(ReducedState {
        x: 1.0,
        y: -(q - r) / g,
        z: (q - r) / (q + r),
    })
}

/// The slow eigenvector of Ľ (eigenvalue r − q), scaled to X = 1.
pub fn stationary_state(params: &PseudomodeParams) -> Result<ReducedState> {
    let r = solve_r(params)?;
    stationary_from_root(params, r)
}

/// Scalars of e^{Ľt} = (a + bs + cs²)·1 + (b + 2cs)·Ľ' + c·Ľ'².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// √((λ + r)²/4 − p), real or purely imaginary.
    pub delta: Complex64,
    pub t: f64,
}

fn coefficients(params: &PseudomodeParams, sp: &Spectrum, t: f64) -> Result<PropagatorCoefficients> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain_param("time must be finite and nonnegative"));
    }
    let q = params.q;
    let u = sp.r + sp.s;
    let d2 = sp.delta_sq;
    let decay = q + sp.s;
    let damp = (-decay * t).exp();

    // e^{−(q+s)t}·cosh(Δt) and e^{−(q+s)t}·sinh(Δt)/Δ without overflow
    let (ecosh, esinh) = if d2 > 0.0 && d2 * t * t >= 1e-6 {
        let d = d2.sqrt();
        let up = ((d - decay) * t).exp();
        let dn = ((-d - decay) * t).exp();
        (0.5 * (up + dn), 0.5 * (up - dn) / d)
    } else {
        (damp * cosh_sq(d2, t), damp * sinh_over_sq(d2, t))
    };

    let reach = u.abs().max(d2.abs().sqrt()) * t;
    let c = if reach <= SERIES_REACH {
        damp * exp_divided_difference_series(u, d2, t)
    } else {
        let den = sp.denominator();
        if den.abs() < DEGENERATE_DENOMINATOR {
            return Err(Error::DegenerateSpectrum { denominator: den });
        }
        (((sp.r - q) * t).exp() - ecosh - u * esinh) / den
    };
    Ok(PropagatorCoefficients {
        a: ecosh - c * d2,
        b: esinh,
        c,
        delta: sp.delta(),
        t,
    })
}

fn assemble(params: &PseudomodeParams, sp: &Spectrum, k: &PropagatorCoefficients) -> Matrix3 {
    let mut lp = liouvillian_matrix(params);
    for (i, row) in lp.iter_mut().enumerate() {
        row[i] += params.q;
    }
    let lp2 = mat_mul(&lp, &lp);
    let c0 = k.a + k.b * sp.s + k.c * sp.s * sp.s;
    let c1 = k.b + 2.0 * k.c * sp.s;
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = c1 * lp[i][j] + k.c * lp2[i][j];
        }
        out[i][i] += c0;
    }
    out
}

/// Pseudomode model with the root and stationary state solved once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudomodeModel {
    params: PseudomodeParams,
    spectrum: Spectrum,
}

impl PseudomodeModel {
    pub fn new(params: PseudomodeParams) -> Result<Self> {
        let r = solve_r(&params)?;
        Ok(PseudomodeModel {
            params,
            spectrum: Spectrum::new(&params, r),
        })
    }

    pub fn params(&self) -> &PseudomodeParams {
        &self.params
    }

    pub fn r(&self) -> f64 {
        self.spectrum.r
    }

    /// Slow occupation decay rate q − r.
    pub fn slow_rate(&self) -> f64 {
        self.params.q - self.spectrum.r
    }

    pub fn eigenvalues(&self) -> [Complex64; 3] {
        self.spectrum.eigenvalues()
    }

    pub fn coefficients(&self, t: f64) -> Result<PropagatorCoefficients> {
        coefficients(&self.params, &self.spectrum, t)
    }

    pub fn propagator(&self, t: f64) -> Result<Matrix3> {
        let k = self.coefficients(t)?;
        Ok(assemble(&self.params, &self.spectrum, &k))
    }

    pub fn stationary_state(&self) -> Result<ReducedState> {
        stationary_from_root(&self.params, self.spectrum.r)
    }

    /// ⟨a(0)||a(t)⟩ = Tr Â e^{tĽ}Ǎρ / Tr Â e^{tĽ}ρ for the slow eigenstate ρ.
    pub fn conditional_avg(&self, t: f64) -> Result<f64> {
        let v = self.stationary_state()?;
        let w = self.propagate(v.measured(), t)?;
        Ok(w.x * ((self.params.q - self.spectrum.r) * t).exp() / v.x)
    }

    pub fn propagate(&self, state: ReducedState, t: f64) -> Result<ReducedState> {
        let m = self.propagator(t)?;
        Ok(ReducedState::from_array(mat_vec(&m, state.as_array())))
    }

    pub fn curve(&self, times: &[f64]) -> Result<CorrelationCurve> {
        let values = times
            .iter()
            .map(|&t| self.conditional_avg(t))
            .collect::<Result<Vec<_>>>()?;
        let mut parameters = self.params.snapshot();
        parameters.insert("r".into(), self.spectrum.r);
        CorrelationCurve::new(times.to_vec(), values, Branch::PseudomodeExact, parameters)
    }
}

pub fn propagator_coefficients(params: &PseudomodeParams, t: f64) -> Result<PropagatorCoefficients> {
    PseudomodeModel::new(*params)?.coefficients(t)
}

/// e^{Ľt} by the Cayley–Hamilton closed form.
pub fn propagator(params: &PseudomodeParams, t: f64) -> Result<Matrix3> {
    PseudomodeModel::new(*params)?.propagator(t)
}

pub fn conditional_avg(params: &PseudomodeParams, t: f64) -> Result<f64> {
    PseudomodeModel::new(*params)?.conditional_avg(t)
}

/// The λ = 0 propagator, computed through the general closed form.
pub fn lambda0_propagator(params: &PseudomodeParams, t: f64) -> Result<Matrix3> {
    if params.lambda != 0.0 {
        return Err(Error::domain_param("lambda0_propagator requires lambda = 0"));
    }
    propagator(params, t)
}

pub fn mat_mul(a: &Matrix3, b: &Matrix3) -> Matrix3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub fn mat_vec(a: &Matrix3, v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = (0..3).map(|k| a[i][k] * v[k]).sum();
    }
    out
}
