// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

//! Reservoir coupling profiles.
//!
//! |V(k)|² is the squared coupling of the local state to reservoir mode k,
//! with V(k) = ∫dx e^{ikx} V̄(x) for the real-space potential V̄. Only
//! |V(k)|² enters the implemented formulas, so phases are not represented.
//! Everything is dimensionless.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, IntegrationResult, LineOptions, QuadValue, Tolerance};

/// Parametric family α q^{2m−1} / ((k−k₀)² + q²)^m.
///
/// The peak value is α/q for every m; no re-normalization by m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lorentzian {
    pub alpha: f64,
    pub q: f64,
    pub k0: f64,
    pub m: u32,
}

impl Lorentzian {
    pub fn new(alpha: f64, q: f64, k0: f64, m: u32) -> Result<Self> {
        let l = Lorentzian { alpha, q, k0, m };
        l.validate()?;
        Ok(l)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::domain_param("alpha must be finite and nonnegative"));
        }
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(Error::domain_param("q must be positive"));
        }
        if !self.k0.is_finite() {
            return Err(Error::domain_param("k0 must be finite"));
        }
        if self.m < 1 {
            return Err(Error::domain_param("m must be at least 1"));
        }
        Ok(())
    }

    pub fn eval(&self, k: f64) -> f64 {
        let d = k - self.k0;
        let m = self.m as i32;
        self.alpha * self.q.powi(2 * m - 1) / (d * d + self.q * self.q).powi(m)
    }

    /// ∫|V(k)|² dk = απ·(2m−3)!!/(2m−2)!!.
    pub fn total_weight(&self) -> f64 {
        let mut ratio = 1.0;
        for j in 1..self.m {
            ratio *= (2 * j - 1) as f64 / (2 * j) as f64;
        }
        self.alpha * PI * ratio
    }
}

/// Piecewise-linear density through `(k, value)` samples, zero outside the
/// sampled range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedDensity {
    samples: Vec<(f64, f64)>,
}

impl TabulatedDensity {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::domain_param("tabulated density needs at least two samples"));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::domain_param("tabulated k must be strictly increasing"));
            }
        }
        if samples
            .iter()
            .any(|&(k, v)| !k.is_finite() || !v.is_finite() || v < 0.0)
        {
            return Err(Error::domain_param("tabulated values must be finite and nonnegative"));
        }
        Ok(TabulatedDensity { samples })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn eval(&self, k: f64) -> f64 {
        interpolate(&self.samples, k, 0.0, |a, b, s| a + (b - a) * s)
    }

    /// Exact for the linear interpolant.
    pub fn total_weight(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
            .sum()
    }
}

fn interpolate<V: Copy>(samples: &[(f64, V)], x: f64, zero: V, lerp: impl Fn(V, V, f64) -> V) -> V {
    let first = samples[0].0;
    let last = samples[samples.len() - 1].0;
    if !(x >= first && x <= last) {
        return zero;
    }
    let idx = samples.partition_point(|s| s.0 <= x);
    if idx == samples.len() {
        return samples[samples.len() - 1].1;
    }
    let (x0, v0) = samples[idx - 1];
    let (x1, v1) = samples[idx];
    lerp(v0, v1, (x - x0) / (x1 - x0))
}

/// A reservoir spectral density |V(k)|².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SpectralDensity {
    Lorentzian(Lorentzian),
    Tabulated(TabulatedDensity),
}

impl SpectralDensity {
    pub fn lorentzian(alpha: f64, q: f64, k0: f64, m: u32) -> Result<Self> {
        Lorentzian::new(alpha, q, k0, m).map(SpectralDensity::Lorentzian)
    }

    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        TabulatedDensity::new(samples).map(SpectralDensity::Tabulated)
    }

    /// |V(k)|².
    pub fn eval(&self, k: f64) -> f64 {
        match self {
            SpectralDensity::Lorentzian(l) => l.eval(k),
            SpectralDensity::Tabulated(t) => t.eval(k),
        }
    }

    /// |V(0)|², the lowest-order decay rate R.
    pub fn at_zero(&self) -> f64 {
        self.eval(0.0)
    }

    pub fn total_weight(&self) -> f64 {
        match self {
            SpectralDensity::Lorentzian(l) => l.total_weight(),
            SpectralDensity::Tabulated(t) => t.total_weight(),
        }
    }

    /// Characteristic momentum width k_c.
    pub fn scale(&self) -> f64 {
        match self {
            SpectralDensity::Lorentzian(l) => l.q,
            SpectralDensity::Tabulated(t) => {
                let s = t.samples();
                0.5 * (s[s.len() - 1].0 - s[0].0)
            }
        }
    }

    pub fn center(&self) -> f64 {
        match self {
            SpectralDensity::Lorentzian(l) => l.k0,
            SpectralDensity::Tabulated(t) => {
                let s = t.samples();
                0.5 * (s[s.len() - 1].0 + s[0].0)
            }
        }
    }

    /// Finite support, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            SpectralDensity::Lorentzian(_) => None,
            SpectralDensity::Tabulated(t) => {
                let s = t.samples();
                Some((s[0].0, s[s.len() - 1].0))
            }
        }
    }

    /// Points where the density has kinks.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            SpectralDensity::Lorentzian(_) => Vec::new(),
            SpectralDensity::Tabulated(t) => t.samples().iter().map(|s| s.0).collect(),
        }
    }

    /// The Lorentzian m = 1, k₀ = 0 member, which has an exact pseudomode.
    pub fn as_single_pole(&self) -> Option<Lorentzian> {
        match self {
            SpectralDensity::Lorentzian(l) if l.m == 1 && l.k0 == 0.0 => Some(*l),
            _ => None,
        }
    }

    /// ∫ |V(k)|² w(k) dk over the real line (or the finite support).
    ///
    /// `frequency` announces an oscillating factor in `w`; `extra_breaks`
    /// adds structure points of `w` itself.
    pub fn integrate_weighted<T: QuadValue>(
        &self,
        mut weight: impl FnMut(f64) -> T,
        frequency: f64,
        extra_breaks: &[f64],
        tol: impl Into<Tolerance>,
    ) -> Result<IntegrationResult<T>> {
        let mut breaks = self.breakpoints();
        breaks.extend_from_slice(extra_breaks);
        let integrand = |k: f64| weight(k) * self.eval(k);
        match self.support() {
            Some((lo, hi)) => {
                breaks.extend(oscillation_breaks(frequency, lo, hi));
                quad::integrate_with_breaks(integrand, lo, hi, &breaks, tol)
            }
            None => {
                let opts = LineOptions {
                    center: self.center(),
                    scale: self.scale(),
                    frequency,
                    breakpoints: &breaks,
                    ..Default::default()
                };
                quad::integrate_line_with(integrand, &opts, tol)
            }
        }
    }

    /// Fourier kernel K(τ) = ∫dp |V(p)|² e^{ipτ}.
    ///
    /// Closed form πα e^{(ik₀−q)τ} for m = 1; adaptive quadrature otherwise.
    pub fn kernel(&self, tau: f64, tol: impl Into<Tolerance>) -> Result<Complex64> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::domain_param("kernel lag must be finite and nonnegative"));
        }
        if let SpectralDensity::Lorentzian(l) = self {
            if l.m == 1 {
                return Ok(Complex64::new(-l.q * tau, l.k0 * tau).exp() * (PI * l.alpha));
            }
        }
        if let Some((lo, hi)) = self.support() {
            let mut breaks = self.breakpoints();
            breaks.extend(oscillation_breaks(tau, lo, hi));
            let r = quad::integrate_with_breaks(
                |p: f64| Complex64::new(0.0, p * tau).exp() * self.eval(p),
                lo,
                hi,
                &breaks,
                tol,
            )?;
            return Ok(r.value);
        }
        let opts = LineOptions {
            center: self.center(),
            scale: self.scale(),
            ..Default::default()
        };
        let r = quad::integrate_fourier(|p: f64| Complex64::new(self.eval(p), 0.0), tau, &opts, tol)?;
        Ok(r.value)
    }

    /// ∫ |V(k)|² w(k) dk for a weight that oscillates at frequency ω.
    ///
    /// Inside the central window (or on a finite support) `full` is used as
    /// is. Beyond it the weight must split as
    /// w(k) = smooth(k) + Re[amplitude(k)·e^{iωk}] with smooth, decaying
    /// `smooth` and `amplitude`.
    pub fn integrate_split(
        &self,
        mut full: impl FnMut(f64) -> f64,
        mut smooth: impl FnMut(f64) -> f64,
        mut amplitude: impl FnMut(f64) -> Complex64,
        omega: f64,
        tol: impl Into<Tolerance>,
    ) -> Result<IntegrationResult<f64>> {
        let tol = tol.into();
        let mut breaks = self.breakpoints();
        if let Some((lo, hi)) = self.support() {
            breaks.extend(oscillation_breaks(omega, lo, hi));
            return quad::integrate_with_breaks(|k| full(k) * self.eval(k), lo, hi, &breaks, tol);
        }
        let opts = LineOptions {
            center: self.center(),
            scale: self.scale(),
            breakpoints: &breaks,
            ..Default::default()
        };
        let (lo, hi) = quad::fourier_window(&opts);
        let part = Tolerance {
            abs: tol.abs / 5.0,
            rel: tol.rel / 5.0,
        };
        let mut central_breaks = breaks.clone();
        central_breaks.push(0.0);
        let central = quad::integrate_window(|k| full(k) * self.eval(k), lo, hi, omega, &central_breaks, part)?;
        let tail_opts = LineOptions {
            center: 0.0,
            breakpoints: &[],
            ..opts
        };
        let right = quad::integrate_semi_infinite(|k| smooth(k) * self.eval(k), hi, &tail_opts, part)?;
        let left = quad::integrate_to(|k| smooth(k) * self.eval(k), lo, &tail_opts, part)?;
        let mut value = central.value + right.value + left.value;
        let mut error = central.error_estimate + right.error_estimate + left.error_estimate;
        let mut evaluations = central.evaluations + right.evaluations + left.evaluations;
        if omega != 0.0 {
            let r = quad::integrate_oscillatory_tail(|k| amplitude(k) * self.eval(k), hi, omega, part)?;
            let l = quad::integrate_oscillatory_tail(|y| amplitude(-y) * self.eval(-y), -lo, -omega, part)?;
            value += r.value.re + l.value.re;
            error += r.error_estimate + l.error_estimate;
            evaluations += r.evaluations + l.evaluations;
        } else {
            let r = quad::integrate_semi_infinite(|k| amplitude(k).re * self.eval(k), hi, &tail_opts, part)?;
            let l = quad::integrate_to(|k| amplitude(k).re * self.eval(k), lo, &tail_opts, part)?;
            value += r.value + l.value;
            error += r.error_estimate + l.error_estimate;
            evaluations += r.evaluations + l.evaluations;
        }
        Ok(IntegrationResult {
            value,
            error_estimate: error,
            evaluations,
        })
    }
}

fn oscillation_breaks(frequency: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let w = frequency.abs();
    if w * (hi - lo) <= quad::OSCILLATION_SPLIT_THRESHOLD {
        return out;
    }
    let step = PI / w;
    let n = ((hi - lo) / step).min(4096.0) as usize;
    let step = (hi - lo) / n.max(1) as f64;
    for j in 1..n {
        out.push(lo + j as f64 * step);
    }
    out
}

/// A tabulated kernel value K(τ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierKernel {
    pub tau: f64,
    pub value: Complex64,
}

/// Relative magnitude below which an exponential potential is treated as
/// zero when deciding its support.
pub const EXPONENTIAL_SUPPORT_CUTOFF: f64 = 1e-12;

/// Short-range real-space coupling V̄(x).
#[derive(Debug, Clone, PartialEq)]
pub enum RealSpacePotential {
    /// c on 0 < x < w.
    Box { c: Complex64, w: f64 },
    /// c·e^{−q|x|}.
    Exponential { c: Complex64, q: f64 },
    /// Linear interpolation of samples, zero outside.
    Tabulated { samples: Vec<(f64, Complex64)> },
}

impl RealSpacePotential {
    pub fn boxcar(c: impl Into<Complex64>, w: f64) -> Result<Self> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::domain_param("box width must be positive"));
        }
        Ok(RealSpacePotential::Box { c: c.into(), w })
    }

    pub fn exponential(c: impl Into<Complex64>, q: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::domain_param("exponential range q must be positive"));
        }
        Ok(RealSpacePotential::Exponential { c: c.into(), q })
    }

    pub fn tabulated(samples: Vec<(f64, Complex64)>) -> Result<Self> {
        if samples.len() < 2 || samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::domain_param(
                "tabulated potential needs at least two strictly increasing samples",
            ));
        }
        Ok(RealSpacePotential::Tabulated { samples })
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            RealSpacePotential::Box { c, w } => {
                if x > 0.0 && x < *w {
                    *c
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            RealSpacePotential::Exponential { c, q } => *c * (-q * x.abs()).exp(),
            RealSpacePotential::Tabulated { samples } => {
                interpolate(samples, x, Complex64::new(0.0, 0.0), |a, b, s| a + (b - a) * s)
            }
        }
    }

    /// Interval outside which V̄ vanishes (or is below
    /// [`EXPONENTIAL_SUPPORT_CUTOFF`] relative to its peak).
    pub fn support(&self) -> (f64, f64) {
        match self {
            RealSpacePotential::Box { w, .. } => (0.0, *w),
            RealSpacePotential::Exponential { q, .. } => {
                let reach = -EXPONENTIAL_SUPPORT_CUTOFF.ln() / q;
                (-reach, reach)
            }
            RealSpacePotential::Tabulated { samples } => (samples[0].0, samples[samples.len() - 1].0),
        }
    }

    /// Kinks and jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            RealSpacePotential::Box { w, .. } => alloc::vec![0.0, *w],
            RealSpacePotential::Exponential { .. } => alloc::vec![0.0],
            RealSpacePotential::Tabulated { samples } => samples.iter().map(|s| s.0).collect(),
        }
    }

    /// |V(k)|² of the exponential profile: V(k) = 2cq/(k²+q²), a Lorentzian
    /// with m = 2 and α = 4|c|²/q.
    pub fn exponential_density(&self) -> Option<SpectralDensity> {
        match self {
            RealSpacePotential::Exponential { c, q } => {
                SpectralDensity::lorentzian(4.0 * c.norm_sqr() / q, *q, 0.0, 2).ok()
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn lorentzian_substitution_values() {
        let sd = SpectralDensity::lorentzian(1.0, 1.0, 0.0, 1).unwrap();
        assert_eq!(sd.eval(0.0), 1.0);
        let sd = SpectralDensity::lorentzian(1.0, 2.0, 0.0, 2).unwrap();
        assert_relative_eq!(sd.eval(2.0), 0.125, epsilon = 1e-15);
        let zero = SpectralDensity::lorentzian(0.0, 1.3, 0.4, 3).unwrap();
        assert_eq!(zero.eval(-7.0), 0.0);
    }

    #[test]
    fn invalid_lorentzian_parameters() {
        assert!(SpectralDensity::lorentzian(1.0, 0.0, 0.0, 1).is_err());
        assert!(SpectralDensity::lorentzian(1.0, -1.0, 0.0, 1).is_err());
        assert!(SpectralDensity::lorentzian(1.0, 1.0, 0.0, 0).is_err());
        assert!(SpectralDensity::lorentzian(-1.0, 1.0, 0.0, 1).is_err());
    }

    #[test]
    fn tabulated_interpolates_and_vanishes_outside() {
        let sd = SpectralDensity::tabulated(alloc::vec![(-1.0, 0.0), (0.0, 2.0), (2.0, 0.0)]).unwrap();
        assert_eq!(sd.eval(-0.5), 1.0);
        assert_eq!(sd.eval(1.0), 1.0);
        assert_eq!(sd.eval(2.0), 0.0);
        assert_eq!(sd.eval(2.5), 0.0);
        assert_eq!(sd.eval(-3.0), 0.0);
        assert_relative_eq!(sd.total_weight(), 3.0);
        assert!(SpectralDensity::tabulated(alloc::vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(SpectralDensity::tabulated(alloc::vec![(0.0, 1.0), (1.0, -2.0)]).is_err());
    }

    #[test]
    fn single_pole_kernel_is_exponential() {
        let (alpha, q) = (0.3, 1.7);
        let sd = SpectralDensity::lorentzian(alpha, q, 0.0, 1).unwrap();
        for &tau in &[0.0, 0.5, 3.0] {
            let k = sd.kernel(tau, 1e-12).unwrap();
            assert_relative_eq!(k.re, PI * alpha * (-q * tau).exp(), epsilon = 1e-15);
            assert_eq!(k.im, 0.0);
        }
    }

    #[test]
    fn kernel_at_zero_is_total_weight() {
        for m in 1..=3 {
            let sd = SpectralDensity::lorentzian(0.7, 1.3, 0.2, m).unwrap();
            let direct = sd
                .integrate_weighted(|_| 1.0, 0.0, &[], Tolerance::relative(1e-12))
                .unwrap()
                .value;
            let kernel = sd.kernel(0.0, 1e-13).unwrap();
            assert_relative_eq!(kernel.re, direct, max_relative = 1e-8);
            assert_relative_eq!(direct, sd.total_weight(), max_relative = 1e-10);
        }
    }

    #[test]
    fn shifted_kernel_is_numerical_for_m2() {
        // K(τ) for m = 2, k0 = 0 has the residue form (πα/2)(1+qτ)e^{−qτ}.
        let (alpha, q) = (1.0, 1.0);
        let sd = SpectralDensity::lorentzian(alpha, q, 0.0, 2).unwrap();
        for &tau in &[0.25, 1.0, 6.0] {
            let k = sd.kernel(tau, 1e-12).unwrap();
            let exact = 0.5 * PI * alpha * (1.0 + q * tau) * (-q * tau).exp();
            assert!((k.re - exact).abs() < 1e-10, "{tau}: {} vs {exact}", k.re);
            assert!(k.im.abs() < 1e-10);
        }
    }

    #[test]
    fn kernel_rejects_negative_lag() {
        let sd = SpectralDensity::lorentzian(1.0, 1.0, 0.0, 1).unwrap();
        assert!(sd.kernel(-1.0, 1e-10).is_err());
    }

    #[test]
    fn real_space_profiles() {
        let b = RealSpacePotential::boxcar(1.0, 1.0).unwrap();
        assert_eq!(b.eval(0.5), Complex64::new(1.0, 0.0));
        assert_eq!(b.eval(2.0), Complex64::new(0.0, 0.0));
        let e = RealSpacePotential::exponential(2.0, 1.0).unwrap();
        assert_relative_eq!(e.eval(-1.0).re, 2.0 * (-1.0f64).exp(), epsilon = 1e-15);
        assert!(RealSpacePotential::boxcar(1.0, 0.0).is_err());
        let t = RealSpacePotential::tabulated(alloc::vec![
            (0.0, Complex64::new(0.0, 1.0)),
            (1.0, Complex64::new(2.0, 1.0)),
        ])
        .unwrap();
        assert_eq!(t.eval(0.5), Complex64::new(1.0, 1.0));
        assert_eq!(t.eval(1.5), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn exponential_profile_fourier_transform() {
        // V(k) = ∫ e^{ikx} c e^{−q|x|} dx = 2cq/(k²+q²)
        let (c, q) = (0.3, 1.4);
        let rp = RealSpacePotential::exponential(c, q).unwrap();
        let sd = rp.exponential_density().unwrap();
        for &k in &[0.0, 0.7, 3.0] {
            let v = quad::integrate_line_with(
                |x: f64| Complex64::new(0.0, k * x).exp() * rp.eval(x),
                &LineOptions {
                    breakpoints: &[0.0],
                    frequency: k,
                    ..Default::default()
                },
                1e-13,
            )
            .unwrap()
            .value;
            assert_relative_eq!(v.norm_sqr(), sd.eval(k), max_relative = 1e-10);
        }
    }

    proptest! {
        #[test]
        fn density_is_nonnegative(
            alpha in 0.0f64..10.0,
            q in 1e-3f64..10.0,
            k0 in -5.0f64..5.0,
            m in 1u32..5,
            k in -100.0f64..100.0,
        ) {
            let sd = SpectralDensity::lorentzian(alpha, q, k0, m).unwrap();
            prop_assert!(sd.eval(k) >= 0.0);
        }

        #[test]
        fn single_pole_kernel_magnitude_decreases(
            alpha in 1e-3f64..5.0,
            q in 0.05f64..5.0,
            k0 in -3.0f64..3.0,
            tau in 0.0f64..20.0,
            dtau in 1e-3f64..5.0,
        ) {
            let sd = SpectralDensity::lorentzian(alpha, q, k0, 1).unwrap();
            let a = sd.kernel(tau, 1e-10).unwrap().norm();
            let b = sd.kernel(tau + dtau, 1e-10).unwrap().norm();
            prop_assert!(b < a);
        }
    }
}
