// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

//! Lowest-order results for arbitrary coupling profiles.
//!
//! Conventions: V(k) = ∫dx e^{ikx} V̄(x) and every k-integral of a rate
//! carries 1/2π, so that R = 2 Re Γ ≃ |V(0)|².

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::curve::{Branch, CorrelationCurve};
use crate::error::{Error, Result};
use crate::quad::{self, LineOptions, PvOptions, PvRange, Tolerance};
use crate::special::{exp_remainder2, sinc_real};
use crate::spectral::{Lorentzian, RealSpacePotential, SpectralDensity};

/// Default regulator ε in the Γ equation.
pub const DEFAULT_EPSILON: f64 = 1e-8;

/// Iteration cap of the Γ fixed point.
pub const GAMMA_MAX_ITERATIONS: usize = 500;

/// |S| below which [`decay_shift`] refuses to divide.
pub const OVERLAP_THRESHOLD: f64 = 1e-8;

/// Relative increment below which a curve counts as saturated.
pub const SATURATION_INCREMENT: f64 = 1e-6;

/// Self-consistent decay constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    pub gamma: Complex64,
    /// R = 2 Re Γ
    pub rate: f64,
    pub lambda: f64,
    pub epsilon: f64,
    /// Fixed-point iterations used at the finer regulator.
    pub iterations: usize,
}

impl DecayRates {
    fn new(gamma: Complex64, epsilon: f64, iterations: usize) -> Self {
        DecayRates {
            gamma,
            rate: 2.0 * gamma.re,
            lambda: 0.0,
            epsilon,
            iterations,
        }
    }
}

/// (1/2π)∫₀^∞ K(z) e^{(Γ−ε)z} dz for the Lorentzian family.
///
/// K(z) = α e^{(ik₀−q)z} Σ_j 2π d_j (qz)^j/j!, so the transform is
/// α Σ_j d_j q^j / w^{j+1} with w = q − ik₀ + ε − Γ.
fn lorentzian_laplace(l: &Lorentzian, gamma: Complex64, eps: f64) -> Option<Complex64> {
    let w = Complex64::new(l.q + eps, -l.k0) - gamma;
    if !(w.re > 0.0) {
        return None;
    }
    let m = l.m as usize;
    // d_{m−1} = 2^{−m}; d_{j−1} = d_j (2m−1−j)/(2(m−j))
    let mut d = vec_of_coefficients(m);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut wpow = w;
    let mut qpow = 1.0;
    for dj in d.drain(..) {
        sum += dj * qpow / wpow;
        qpow *= l.q;
        wpow *= w;
    }
    Some(sum * l.alpha)
}

fn vec_of_coefficients(m: usize) -> Vec<f64> {
    let mut d = alloc::vec![0.0; m];
    d[m - 1] = 0.5f64.powi(m as i32);
    for j in (1..m).rev() {
        d[j - 1] = d[j] * (2 * m - 1 - j) as f64 / (2 * (m - j)) as f64;
    }
    d
}

fn lorentzian_fixed_point(l: &Lorentzian, eps: f64, tol: f64) -> Result<(Complex64, usize)> {
    let mut gamma = Complex64::new(0.0, 0.0);
    let mut previous = gamma;
    for it in 1..=GAMMA_MAX_ITERATIONS {
        let next = lorentzian_laplace(l, gamma, eps).ok_or(Error::Convergence {
            last: gamma,
            previous,
            iterations: it,
        })?;
        previous = gamma;
        gamma = next;
        if (gamma - previous).norm() <= tol {
            let residual = lorentzian_laplace(l, gamma, eps).map(|f| (f - gamma).norm());
            if residual.is_some_and(|r| r < tol) {
                return Ok((gamma, it));
            }
        }
        if !(gamma.re.is_finite() && gamma.im.is_finite()) {
            break;
        }
    }
    Err(Error::Convergence {
        last: gamma,
        previous,
        iterations: GAMMA_MAX_ITERATIONS,
    })
}

/// Solves Γ = ∫dk/2π |V(k)|²/(ε − Γ − ik) seeded at Γ = 0.
///
/// For Lorentzian densities the right side is continued analytically
/// through its Laplace form (1/2π)∫₀^∞ K(z)e^{(Γ−ε)z}dz, exact for every m;
/// the result is extrapolated to ε → 0 from ε and ε/2. Tabulated densities
/// have no continuation, and return the first iterate
/// Γ = |V(0)|²/2 + (i/2π) PV∫|V(k)|²/k dk.
pub fn solve_gamma(sd: &SpectralDensity, epsilon: f64, tol: f64) -> Result<DecayRates> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain_param("epsilon must be positive"));
    }
    if !(tol > 0.0) {
        return Err(Error::domain_param("tolerance must be positive"));
    }
    match sd {
        SpectralDensity::Lorentzian(l) => {
            if l.alpha == 0.0 {
                return Ok(DecayRates::new(Complex64::new(0.0, 0.0), epsilon, 0));
            }
            let (coarse, _) = lorentzian_fixed_point(l, epsilon, tol)?;
            let (fine, iterations) = lorentzian_fixed_point(l, 0.5 * epsilon, tol)?;
            Ok(DecayRates::new(fine * 2.0 - coarse, epsilon, iterations))
        }
        SpectralDensity::Tabulated(_) => {
            let shift = level_shift(sd, tol)?;
            Ok(DecayRates::new(
                Complex64::new(0.5 * sd.at_zero(), shift / (2.0 * PI)),
                epsilon,
                1,
            ))
        }
    }
}

/// Residual of the Γ equation on the analytically continued branch.
pub fn gamma_residual(sd: &SpectralDensity, gamma: Complex64, epsilon: f64) -> Option<f64> {
    match sd {
        SpectralDensity::Lorentzian(l) => lorentzian_laplace(l, gamma, epsilon).map(|f| (f - gamma).norm()),
        SpectralDensity::Tabulated(_) => None,
    }
}

/// PV∫|V(k)|²/k dk.
fn level_shift(sd: &SpectralDensity, tol: f64) -> Result<f64> {
    let breaks = sd.breakpoints();
    let (lo, hi) = sd.support().unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    if lo >= 0.0 || hi <= 0.0 {
        return Ok(quad::integrate_with_breaks(|k: f64| sd.eval(k) / k, lo, hi, &breaks, tol)?.value);
    }
    let radius = 0.5 * hi.min(-lo).min(sd.scale());
    let opts = PvOptions {
        range: PvRange::Window(lo, hi),
        radius,
        line: LineOptions {
            breakpoints: &breaks,
            ..Default::default()
        },
        ..Default::default()
    };
    Ok(quad::integrate_pv_with(|k| sd.eval(k) / k, 0.0, &opts, tol)?.value)
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain_param("time must be finite and nonnegative"))
    }
}

fn tolerance(tol: f64) -> Tolerance {
    Tolerance {
        abs: tol,
        rel: 1e-13,
    }
}

/// ⟨a(0)||a(t)⟩ to lowest order at λ = 0:
/// 1 + |V(0)|² t/2 − ∫dk |V(k)|² sin²(kt/2)/(πk²).
pub fn conditional_pt0(sd: &SpectralDensity, t: f64, tol: f64) -> Result<f64> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    let c = t * t / (4.0 * PI);
    let r = sd.integrate_split(
        |k| c * sinc_real(0.5 * k * t).powi(2),
        |k| 1.0 / (2.0 * PI * k * k),
        |k| Complex64::new(-1.0 / (2.0 * PI * k * k), 0.0),
        t,
        tolerance(tol),
    )?;
    Ok(1.0 + 0.5 * sd.at_zero() * t - r.value)
}

/// PV∫dk (|V(0)|² − |V(k)|²)/(2πk²), the long-time limit of
/// conditional_pt0 − 1.
pub fn saturation(sd: &SpectralDensity, tol: f64) -> Result<f64> {
    let v0 = sd.at_zero();
    let breaks = sd.breakpoints();
    let opts = PvOptions {
        range: PvRange::Line,
        radius: 0.5 * sd.scale(),
        line: LineOptions {
            center: sd.center(),
            scale: sd.scale(),
            breakpoints: &breaks,
            ..Default::default()
        },
        ..Default::default()
    };
    let f = |k: f64| (v0 - sd.eval(k)) / (2.0 * PI * k * k);
    Ok(quad::integrate_pv_with(f, 0.0, &opts, tolerance(tol))?.value)
}

/// ⟨a(0)||a(t)⟩ to lowest order in V at measurement strength λ:
/// 1 + Re∫dk |V(k)|² (1 − e^{−(λ−ik)t})/(2π(λ−ik)²).
///
/// Evaluated as 1 + tR(λ)/2 + (t²/2π)∫|V|² Re χ((λ−ik)t) dk with
/// χ(z) = (1 − e^{−z} − z)/z², which is regular at k = 0 for every λ.
pub fn conditional_cor2(sd: &SpectralDensity, lambda: f64, t: f64, tol: f64) -> Result<f64> {
    check_time(t)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain_param("lambda must be finite and nonnegative"));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let rate = if lambda == 0.0 {
        sd.at_zero()
    } else {
        decay_rate_lambda(sd, lambda, tol)?
    };
    let c = t * t / (2.0 * PI);
    let damp = (-lambda * t).exp();
    let z = |k: f64| Complex64::new(lambda * t, -k * t);
    let r = sd.integrate_split(
        |k| c * exp_remainder2(z(k)).re,
        |k| {
            let zk = z(k);
            c * (zk * zk).inv().re - c * zk.inv().re
        },
        |k| {
            let zk = z(k);
            -(zk * zk).inv() * (c * damp)
        },
        t,
        tolerance(tol),
    )?;
    Ok(1.0 + 0.5 * t * rate + r.value)
}

/// R(λ) = ∫dk λ|V(k)|²/(π(λ² + k²)).
///
/// For λ below the density scale the nascent delta is subtracted:
/// R = |V(0)|² + ∫dk λ(|V(k)|² − |V(0)|²)/(π(λ² + k²)).
pub fn decay_rate_lambda(sd: &SpectralDensity, lambda: f64, tol: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain_param("lambda must be positive"));
    }
    let mut breaks = sd.breakpoints();
    breaks.extend_from_slice(&[0.0, lambda, -lambda]);
    let (center, scale) = (sd.center(), sd.scale());
    let opts = LineOptions {
        center,
        scale: scale.max(lambda),
        breakpoints: &breaks,
        ..Default::default()
    };
    let tol = tolerance(tol);
    if lambda < scale {
        let v0 = sd.at_zero();
        let f = |k: f64| lambda * (sd.eval(k) - v0) / (PI * (lambda * lambda + k * k));
        Ok(v0 + quad::integrate_line_with(f, &opts, tol)?.value)
    } else {
        let f = |k: f64| lambda * sd.eval(k) / (PI * (lambda * lambda + k * k));
        Ok(quad::integrate_line_with(f, &opts, tol)?.value)
    }
}

/// R(1 − e^{−λt})/(2λ), the strong-decoherence coherence function.
pub fn coherence_strong(rate: f64, lambda: f64, t: f64) -> f64 {
    if lambda == 0.0 {
        0.5 * rate * t
    } else {
        -0.5 * rate * (-lambda * t).exp_m1() / lambda
    }
}

/// Decaying and antidecaying states sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WavefunctionProfile {
    pub grid: Vec<f64>,
    pub psi: Vec<Complex64>,
    pub psi_tilde: Vec<Complex64>,
    /// Amplitude on |Ω⟩, fixed to 1.
    pub omega_amplitude: Complex64,
    pub gamma: Complex64,
}

/// ψ(x) = (1/i)∫_{−∞}^x V̄(y)e^{Γ(x−y)}dy and
/// ψ̃(x) = −(1/i)∫_x^∞ V̄(y)e^{Γ*(y−x)}dy.
///
/// Both are accumulated cell by cell, ψ_{j+1} = e^{Γh}ψ_j + cell integral,
/// with adaptive quadrature inside each cell. Exponential profiles have
/// their tails beyond the grid added in closed form; compact profiles must
/// lie inside the grid.
pub fn decaying_wavefunctions(
    rp: &RealSpacePotential,
    gamma: Complex64,
    grid: &[f64],
    tol: f64,
) -> Result<WavefunctionProfile> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain {
            what: "wavefunction grid must be finite and strictly increasing".into(),
        });
    }
    let (x0, xn) = (grid[0], grid[grid.len() - 1]);
    let (lo, hi) = rp.support();
    let exponential = matches!(rp, RealSpacePotential::Exponential { .. });
    if !exponential && (x0 > lo || xn < hi) {
        return Err(Error::Domain {
            what: alloc::format!("grid [{x0}, {xn}] does not cover the potential support [{lo}, {hi}]"),
        });
    }
    let breaks = rp.breakpoints();
    let minus_i = Complex64::new(0.0, -1.0);
    let gc = gamma.conj();
    let n = grid.len();

    let mut psi = alloc::vec![Complex64::new(0.0, 0.0); n];
    let mut psi_tilde = alloc::vec![Complex64::new(0.0, 0.0); n];
    if let RealSpacePotential::Exponential { c, q } = rp {
        // ∫_{−∞}^{x₀} c e^{−q|y|} e^{Γ(x₀−y)} dy and its mirror, for grids
        // reaching into the decaying tails
        if x0 <= 0.0 {
            psi[0] = minus_i * *c * (q * x0).exp() / (*q - gamma);
        }
        if xn >= 0.0 {
            psi_tilde[n - 1] = -minus_i * *c * (-q * xn).exp() / (*q - gc);
        }
    }
    for j in 0..n - 1 {
        let (a, b) = (grid[j], grid[j + 1]);
        let cell = quad::integrate_with_breaks(|y| rp.eval(y) * (gamma * (b - y)).exp(), a, b, &breaks, tol)?;
        psi[j + 1] = (gamma * (b - a)).exp() * psi[j] + minus_i * cell.value;
    }
    for j in (0..n - 1).rev() {
        let (a, b) = (grid[j], grid[j + 1]);
        let cell = quad::integrate_with_breaks(|y| rp.eval(y) * (gc * (y - a)).exp(), a, b, &breaks, tol)?;
        psi_tilde[j] = (gc * (b - a)).exp() * psi_tilde[j + 1] - minus_i * cell.value;
    }
    Ok(WavefunctionProfile {
        grid: grid.to_vec(),
        psi,
        psi_tilde,
        omega_amplitude: Complex64::new(1.0, 0.0),
        gamma,
    })
}

impl WavefunctionProfile {
    /// S = ⟨ψ̃|ψ⟩ including the |Ω⟩ components, trapezoid on the grid.
    pub fn overlap(&self) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..self.grid.len() - 1 {
            let h = self.grid[j + 1] - self.grid[j];
            let f0 = self.psi_tilde[j].conj() * self.psi[j];
            let f1 = self.psi_tilde[j + 1].conj() * self.psi[j + 1];
            s += (f0 + f1) * (0.5 * h);
        }
        self.omega_amplitude.conj() * self.omega_amplitude + s
    }
}

/// R' − R = 2λ(Re(1/S) − 1/|S|²) for the projector on |Ω⟩.
pub fn decay_shift(profile: &WavefunctionProfile, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain_param("lambda must be finite and nonnegative"));
    }
    let s = profile.overlap();
    if !(s.norm() >= OVERLAP_THRESHOLD) {
        return Err(Error::IllConditionedOverlap { overlap: s });
    }
    let w = profile.omega_amplitude.norm_sqr();
    Ok(2.0 * lambda * ((w / s).re - w * w / s.norm_sqr()))
}

/// Recovered |V(k)|² + |V(−k)|² with truncation metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extraction {
    pub k: f64,
    pub value: f64,
    /// Upper limit actually used for the time integral.
    pub truncated_at: f64,
    /// False when the curve never flattened and the result is biased by
    /// the finite record.
    pub saturated: bool,
}

/// Second derivative on a uniform grid: one-sided at the first sample,
/// central inside, backward at the last.
fn second_derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let h2 = h * h;
    let mut out = Vec::with_capacity(n);
    out.push((2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / h2);
    for j in 1..n - 1 {
        out.push((values[j + 1] - 2.0 * values[j] + values[j - 1]) / h2);
    }
    out.push((2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4]) / h2);
    out
}

/// Index where successive increments first drop below
/// SATURATION_INCREMENT × (saturation estimate).
fn saturation_index(values: &[f64]) -> Option<usize> {
    let estimate = (values[values.len() - 1] - values[0]).abs();
    if estimate == 0.0 {
        return Some(0);
    }
    let floor = SATURATION_INCREMENT * estimate;
    (1..values.len()).find(|&j| (values[j] - values[j - 1]).abs() < floor)
}

/// −∫₀^∞ 4cos(kt) g''(t) dt for a sampled curve g on a uniform grid.
pub fn extract_potential(curve: &CorrelationCurve, k: f64) -> Result<Extraction> {
    extract_potential_many(curve, &[k]).map(|mut v| v.remove(0))
}

/// [`extract_potential`] for several momenta sharing one differentiation.
pub fn extract_potential_many(curve: &CorrelationCurve, ks: &[f64]) -> Result<Vec<Extraction>> {
    if curve.len() < 4 {
        return Err(Error::Domain {
            what: "extraction needs at least four samples".into(),
        });
    }
    let h = curve.uniform_step(1e-9).ok_or_else(|| Error::Domain {
        what: "extraction needs a uniform time grid".into(),
    })?;
    let g2 = second_derivative(&curve.values, h);
    let cut = saturation_index(&curve.values);
    let last = cut.unwrap_or(curve.len() - 1).max(1);
    let t0 = curve.times[0];
    let truncated_at = curve.times[last];
    let mut out = Vec::with_capacity(ks.len());
    for &k in ks {
        if !k.is_finite() {
            return Err(Error::domain_param("momentum must be finite"));
        }
        let f = |j: usize| 4.0 * (k * (curve.times[j] - t0)).cos() * g2[j];
        let mut sum = 0.5 * (f(0) + f(last));
        for j in 1..last {
            sum += f(j);
        }
        out.push(Extraction {
            k,
            value: -sum * h,
            truncated_at,
            saturated: cut.is_some(),
        });
    }
    Ok(out)
}

pub(crate) fn density_snapshot(sd: &SpectralDensity) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    match sd {
        SpectralDensity::Lorentzian(l) => {
            m.insert("alpha".into(), l.alpha);
            m.insert("q".into(), l.q);
            m.insert("k0".into(), l.k0);
            m.insert("m".into(), l.m as f64);
        }
        SpectralDensity::Tabulated(t) => {
            m.insert("tabulated_points".into(), t.samples().len() as f64);
        }
    }
    m
}

/// conditional_pt0 sampled on `times`.
pub fn pt0_curve(sd: &SpectralDensity, times: &[f64], tol: f64) -> Result<CorrelationCurve> {
    let values = times
        .iter()
        .map(|&t| conditional_pt0(sd, t, tol))
        .collect::<Result<Vec<_>>>()?;
    CorrelationCurve::new(times.to_vec(), values, Branch::PerturbativePt0, density_snapshot(sd))
}

/// conditional_cor2 sampled on `times`.
pub fn cor2_curve(sd: &SpectralDensity, lambda: f64, times: &[f64], tol: f64) -> Result<CorrelationCurve> {
    let values = times
        .iter()
        .map(|&t| conditional_cor2(sd, lambda, t, tol))
        .collect::<Result<Vec<_>>>()?;
    let mut params = density_snapshot(sd);
    params.insert("lambda".into(), lambda);
    CorrelationCurve::new(times.to_vec(), values, Branch::PerturbativeCor2, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lor(alpha: f64, q: f64, k0: f64, m: u32) -> SpectralDensity {
        SpectralDensity::lorentzian(alpha, q, k0, m).unwrap()
    }

    #[test]
    fn gamma_of_single_pole_is_closed_form() {
        let (alpha, q) = (0.01, 1.0);
        let d = solve_gamma(&lor(alpha, q, 0.0, 1), DEFAULT_EPSILON, 1e-14).unwrap();
        let exact = 0.5 * (q - (q * q - 2.0 * alpha).sqrt());
        assert_relative_eq!(d.gamma.re, exact, max_relative = 1e-10);
        assert!(d.gamma.im.abs() < 1e-14);
        assert_eq!(d.rate, 2.0 * d.gamma.re);
    }

    #[test]
    fn gamma_vanishes_without_coupling() {
        let d = solve_gamma(&lor(0.0, 1.0, 0.0, 2), DEFAULT_EPSILON, 1e-12).unwrap();
        assert_eq!(d.gamma, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn gamma_weak_coupling_rate_is_peak_density() {
        for m in 1..=3 {
            let sd = lor(1e-5, 1.0, 0.0, m);
            let d = solve_gamma(&sd, DEFAULT_EPSILON, 1e-16).unwrap();
            assert_relative_eq!(d.rate, sd.at_zero(), max_relative = 1e-4);
        }
    }

    #[test]
    fn laplace_coefficients_match_kernel_integral() {
        // (1/2π)∫₀^∞ K(z) e^{−wz} dz with K from quadrature, m = 3, k₀ ≠ 0
        let sd = lor(0.2, 1.3, 0.4, 3);
        let l = match sd {
            SpectralDensity::Lorentzian(l) => l,
            _ => unreachable!(),
        };
        let gamma = Complex64::new(0.05, 0.02);
        let closed = lorentzian_laplace(&l, gamma, 0.0).unwrap();
        let numeric = quad::integrate(
            |z: f64| sd.kernel(z, 1e-13).unwrap() * (gamma * z).exp(),
            0.0,
            40.0,
            1e-10,
        )
        .unwrap()
        .value
            / (2.0 * PI);
        assert!((closed - numeric).norm() < 1e-8, "{closed} vs {numeric}");
    }

    #[test]
    fn pt0_single_pole_closed_form() {
        let (alpha, q) = (0.01, 1.0);
        let sd = lor(alpha, q, 0.0, 1);
        for &t in &[0.0, 0.1, 1.0, 5.0, 20.0] {
            let exact = 1.0 + alpha / (2.0 * q * q) * (1.0 - (-q * t).exp());
            assert!((conditional_pt0(&sd, t, 1e-12).unwrap() - exact).abs() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn pt0_initial_slope() {
        let sd = lor(0.3, 2.0, 0.5, 2);
        let h = 1e-5;
        let slope = (conditional_pt0(&sd, h, 1e-14).unwrap() - 1.0) / h;
        assert!((slope - 0.5 * sd.at_zero()).abs() < 1e-4);
    }

    #[test]
    fn saturation_single_pole() {
        for &(alpha, q) in &[(0.01, 0.5), (1.0, 2.0)] {
            let s = saturation(&lor(alpha, q, 0.0, 1), 1e-13).unwrap();
            assert_relative_eq!(s, alpha / (2.0 * q * q), max_relative = 1e-8);
        }
    }

    #[test]
    fn saturation_of_shifted_density_uses_principal_value() {
        let sd = lor(0.1, 1.0, 0.7, 1);
        assert!(saturation(&sd, 1e-12).unwrap().is_finite());
    }

    #[test]
    fn cor2_reduces_to_pt0() {
        let sd = lor(0.01, 1.0, 0.0, 1);
        for &t in &[0.5, 2.0, 10.0] {
            let a = conditional_cor2(&sd, 1e-8, t, 1e-12).unwrap();
            let b = conditional_pt0(&sd, t, 1e-12).unwrap();
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn cor2_at_zero_lambda_is_pt0() {
        let sd = lor(0.05, 1.0, 0.3, 2);
        let a = conditional_cor2(&sd, 0.0, 3.0, 1e-12).unwrap();
        let b = conditional_pt0(&sd, 3.0, 1e-12).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn rate_single_pole() {
        let (alpha, q) = (0.01, 1.0);
        for &lam in &[1e-6, 0.1, 1.0, 30.0] {
            let r = decay_rate_lambda(&lor(alpha, q, 0.0, 1), lam, 1e-14).unwrap();
            assert_relative_eq!(r, alpha / (lam + q), max_relative = 1e-8);
        }
    }

    #[test]
    fn coherence_limits() {
        assert_eq!(coherence_strong(0.2, 1.0, 0.0), 0.0);
        assert_relative_eq!(coherence_strong(0.2, 0.5, 1e3), 0.2, max_relative = 1e-12);
        assert_relative_eq!(coherence_strong(0.2, 1e-12, 3.0), 0.3, max_relative = 1e-9);
    }

    #[test]
    fn box_wavefunction_without_decay() {
        let rp = RealSpacePotential::boxcar(2.0, 1.0).unwrap();
        let grid: Vec<f64> = (0..=40).map(|j| -1.0 + 0.075 * j as f64).collect();
        let p = decaying_wavefunctions(&rp, Complex64::new(0.0, 0.0), &grid, 1e-13).unwrap();
        for (x, psi) in grid.iter().zip(&p.psi) {
            let expect = Complex64::new(0.0, -2.0 * x.clamp(0.0, 1.0));
            assert!((psi - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn box_wavefunction_with_decay() {
        let (c, w, g) = (Complex64::new(0.3, 0.1), 1.0, Complex64::new(0.1, 0.0));
        let rp = RealSpacePotential::boxcar(c, w).unwrap();
        let grid: Vec<f64> = (0..=30).map(|j| -0.5 + 0.1 * j as f64).collect();
        let p = decaying_wavefunctions(&rp, g, &grid, 1e-13).unwrap();
        for (x, psi) in grid.iter().zip(&p.psi) {
            let top = x.clamp(0.0, w);
            // (1/i) c e^{Γx}(1 − e^{−Γ top})/Γ
            let expect = Complex64::new(0.0, -1.0) * c * (g * *x).exp() * (Complex64::new(1.0, 0.0) - (-g * top).exp()) / g;
            assert!((psi - expect).norm() < 1e-8);
        }
        assert!(p.psi_tilde[p.psi_tilde.len() - 1].norm() == 0.0);
    }

    #[test]
    fn grid_must_cover_support() {
        let rp = RealSpacePotential::boxcar(1.0, 2.0).unwrap();
        let grid = [0.0, 0.5, 1.0];
        assert!(matches!(
            decaying_wavefunctions(&rp, Complex64::new(0.1, 0.0), &grid, 1e-10),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn shift_vanishes_without_measurement_or_overlap() {
        let rp = RealSpacePotential::boxcar(0.0, 1.0).unwrap();
        let p = decaying_wavefunctions(&rp, Complex64::new(0.1, 0.0), &[-1.0, 0.0, 2.0], 1e-12).unwrap();
        assert_eq!(decay_shift(&p, 0.3).unwrap(), 0.0);
        let rp = RealSpacePotential::boxcar(0.5, 1.0).unwrap();
        let p = decaying_wavefunctions(&rp, Complex64::new(0.1, 0.0), &[-1.0, 0.0, 2.0], 1e-12).unwrap();
        assert_eq!(decay_shift(&p, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn extraction_of_constant_curve_is_zero() {
        let times: Vec<f64> = (0..50).map(|j| 0.1 * j as f64).collect();
        let c = CorrelationCurve::new(times, alloc::vec![1.0; 50], Branch::PerturbativePt0, BTreeMap::new()).unwrap();
        let e = extract_potential(&c, 1.3).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.saturated);
    }
}
