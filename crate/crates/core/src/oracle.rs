// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

//! Independent reference solvers.
//!
//! Nothing here shares code with [`crate::pseudomode`] beyond parameter
//! types: matrices are exponentiated by scaling and squaring, eigenvalues
//! come from the characteristic polynomial, and the survival amplitude is
//! integrated directly from its memory kernel.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};
use core::ops::{Add, Mul};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::pseudomode::{PseudomodeParams, ReducedState};

/// K_amp(τ) = K(τ)·AMPLITUDE_KERNEL_SCALE relates the amplitude memory
/// kernel to the spectral kernel when k-integrals carry 1/2π.
pub const AMPLITUDE_KERNEL_SCALE: f64 = 1.0 / (2.0 * PI);

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Largest ‖Mt‖₁ accepted by [`expm_dense`].
pub const EXPM_NORM_LIMIT: f64 = 700.0;

/// Square complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseMatrix<const N: usize> {
    pub entries: [[Complex64; N]; N],
}

impl<const N: usize> DenseMatrix<N> {
    pub fn zero() -> Self {
        DenseMatrix {
            entries: [[ZERO; N]; N],
        }
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            m.entries[i][i] = ONE;
        }
        m
    }

    pub fn from_real(a: &[[f64; N]; N]) -> Self {
        let mut m = Self::zero();
        for (row, src) in m.entries.iter_mut().zip(a) {
            for (e, &x) in row.iter_mut().zip(src) {
                *e = Complex64::new(x, 0.0);
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = *self;
        for row in m.entries.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        m
    }

    pub fn apply(&self, v: &[Complex64; N]) -> [Complex64; N] {
        let mut out = [ZERO; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..N).map(|k| self.entries[i][k] * v[k]).sum();
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..N).map(|i| self.entries[i][i]).sum()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..N)
            .map(|j| (0..N).map(|i| self.entries[i][j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..N {
            for j in 0..N {
                m = m.max((self.entries[i][j] - other.entries[i][j]).norm());
            }
        }
        m
    }

    /// Largest imaginary part in absolute value.
    pub fn max_imag(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|r| r.iter())
            .map(|x| x.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn real_part(&self) -> [[f64; N]; N] {
        let mut out = [[0.0; N]; N];
        for (row, src) in out.iter_mut().zip(&self.entries) {
            for (x, e) in row.iter_mut().zip(src) {
                *x = e.re;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .flat_map(|r| r.iter())
            .all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

impl<const N: usize> Mul for DenseMatrix<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for i in 0..N {
            for j in 0..N {
                out.entries[i][j] = (0..N).map(|k| self.entries[i][k] * rhs.entries[k][j]).sum();
            }
        }
        out
    }
}

impl<const N: usize> Add for DenseMatrix<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..N {
            for j in 0..N {
                out.entries[i][j] += rhs.entries[i][j];
            }
        }
        out
    }
}

/// e^{Mt} by scaling and squaring around a Taylor core.
pub fn expm_dense<const N: usize>(m: &DenseMatrix<N>, t: f64) -> Result<DenseMatrix<N>> {
    expm_dense_at_depth(m, t, 0)
}

/// As [`expm_dense`] with `extra` additional halvings of the step.
pub fn expm_dense_at_depth<const N: usize>(
    m: &DenseMatrix<N>,
    t: f64,
    extra: u32,
) -> Result<DenseMatrix<N>> {
    if !m.is_finite() || !t.is_finite() {
        return Err(Error::Range {
            what: "matrix exponential of non-finite input".into(),
        });
    }
    let norm = m.norm1() * t.abs();
    if norm > EXPM_NORM_LIMIT {
        return Err(Error::Range {
            what: alloc::format!("matrix exponential norm {norm:e} exceeds {EXPM_NORM_LIMIT}"),
        });
    }
    let mut squarings = 0u32;
    let mut scaled = norm;
    while scaled > 0.5 {
        scaled *= 0.5;
        squarings += 1;
    }
    squarings += extra;
    let h = t / f64::powi(2.0, squarings as i32);
    let a = m.scale(Complex64::new(h, 0.0));

    let mut out = DenseMatrix::<N>::identity();
    let mut term = DenseMatrix::<N>::identity();
    for k in 1..=30 {
        term = (term * a).scale(Complex64::new(1.0 / k as f64, 0.0));
        out = out + term;
        let size = term.norm1();
        if size <= f64::EPSILON * 1e-3 * out.norm1() {
            break;
        }
    }
    for _ in 0..squarings {
        out = out * out;
    }
    if !out.is_finite() {
        return Err(Error::Range {
            what: "matrix exponential overflowed".into(),
        });
    }
    Ok(out)
}

/// Eigenvalues through the Faddeev–LeVerrier characteristic polynomial and
/// Aberth–Ehrlich simultaneous iteration.
pub fn eigenvalues<const N: usize>(m: &DenseMatrix<N>) -> Result<[Complex64; N]> {
    // monic coefficients c[0..=N], c[N] = 1, p(x) = Σ c_k x^k
    let mut c = [ZERO; 8];
    if N == 0 || N > 7 {
        return Err(Error::domain_param("eigenvalue oracle supports dimensions 1..=7"));
    }
    c[N] = ONE;
    let mut mk = DenseMatrix::<N>::zero();
    for k in 1..=N {
        let mut next = *m * mk;
        for i in 0..N {
            next.entries[i][i] += c[N - k + 1];
        }
        mk = next;
        c[N - k] = -(*m * mk).trace() / k as f64;
    }
    let poly = |x: Complex64| {
        let mut p = ZERO;
        let mut d = ZERO;
        for k in (0..=N).rev() {
            d = d * x + p;
            p = p * x + c[k];
        }
        (p, d)
    };

    let bound = 1.0 + (0..N).map(|k| c[k].norm()).fold(0.0, f64::max);
    let mut roots = [ZERO; N];
    for (j, r) in roots.iter_mut().enumerate() {
        let angle = 2.0 * PI * (j as f64 + 0.25) / N as f64 + 0.4;
        *r = Complex64::from_polar(0.5 * bound, angle);
    }
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..N {
            let (p, d) = poly(roots[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / d;
            let mut repulsion = ZERO;
            for j in 0..N {
                if j != i {
                    let diff = roots[i] - roots[j];
                    if diff.norm() > 0.0 {
                        repulsion += ONE / diff;
                    }
                }
            }
            let step = ratio / (ONE - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                roots[i] -= step;
                moved = moved.max(step.norm() / roots[i].norm().max(1.0));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    sort_roots(&mut roots);
    Ok(roots)
}

fn sort_roots<const N: usize>(roots: &mut [Complex64; N]) {
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
}

/// The 4×4 pseudomode generator on (ρ₀₀, ρ₀₁, ρ₁₀, ρ₁₁) with A = α̃,
/// B = q, g = λ.
pub fn lindblad4_generator(params: &PseudomodeParams) -> DenseMatrix<4> {
    let a = Complex64::new(0.0, params.alpha_tilde());
    let b = Complex64::new(params.q, 0.0);
    let g = Complex64::new(params.lambda, 0.0);
    DenseMatrix {
        entries: [
            [ZERO, a, -a, ZERO],
            [a, -g - b, ZERO, -a],
            [-a, ZERO, -g - b, a],
            [ZERO, -a, a, -b * 2.0],
        ],
    }
}

pub fn lindblad4_evolve(
    params: &PseudomodeParams,
    rho0: &[Complex64; 4],
    t: f64,
) -> Result<[Complex64; 4]> {
    params.validate()?;
    let e = expm_dense(&lindblad4_generator(params), t)?;
    Ok(e.apply(rho0))
}

/// (X, Y, Z) = (ρ₀₀, i√2ρ₀₁, ρ₁₁), real parts.
pub fn lindblad4_to_reduced(rho: &[Complex64; 4]) -> ReducedState {
    ReducedState {
        x: rho[0].re,
        y: (Complex64::new(0.0, SQRT_2) * rho[1]).re,
        z: rho[3].re,
    }
}

/// Inverse of [`lindblad4_to_reduced`] on the antisymmetric sector
/// ρ₁₀ = −ρ₀₁.
pub fn reduced_to_lindblad4(state: &ReducedState) -> [Complex64; 4] {
    let rho01 = Complex64::new(0.0, -state.y / SQRT_2);
    [
        Complex64::new(state.x, 0.0),
        rho01,
        -rho01,
        Complex64::new(state.z, 0.0),
    ]
}

/// Amplitude c(t) of the initially occupied state.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalTrace {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub kernel_id: String,
}

impl SurvivalTrace {
    pub fn final_amplitude(&self) -> Complex64 {
        self.amplitudes[self.amplitudes.len() - 1]
    }

    /// Amplitude at the sample nearest to t.
    pub fn amplitude_near(&self, t: f64) -> Complex64 {
        let dt = self.times[1] - self.times[0];
        let i = ((t / dt).round() as usize).min(self.times.len() - 1);
        self.amplitudes[i]
    }
}

/// Integrates ċ(t) = −∫₀ᵗ K_amp(t − s) c(s) ds from c(0) = 1.
///
/// Memory integrals use the trapezoid rule on the uniform grid; each step is
/// an explicit predictor followed by one trapezoid corrector. Growth of |c|
/// beyond 1 + 10⁻⁶ is reported as a step-size error.
pub fn survival_amplitude(
    mut kernel: impl FnMut(f64) -> Complex64,
    t_max: f64,
    dt: f64,
    kernel_id: impl Into<String>,
) -> Result<SurvivalTrace> {
    if !(t_max > 0.0 && t_max.is_finite() && dt > 0.0) {
        return Err(Error::domain_param("survival amplitude needs positive T and dt"));
    }
    if dt > t_max / 100.0 {
        return Err(Error::domain_param("dt must not exceed T/100"));
    }
    let n = (t_max / dt).round() as usize;
    let k: Vec<Complex64> = (0..=n).map(|j| kernel(j as f64 * dt)).collect();
    let mut c: Vec<Complex64> = Vec::with_capacity(n + 1);
    c.push(ONE);
    // memory integral at step j given c_0..c_j
    let memory = |c: &[Complex64], j: usize| -> Complex64 {
        if j == 0 {
            return ZERO;
        }
        let mut s = (k[j] * c[0] + k[0] * c[j]) * 0.5;
        for i in 1..j {
            s += k[j - i] * c[i];
        }
        s * dt
    };
    let mut prev_memory = ZERO;
    for j in 1..=n {
        let last = c[j - 1];
        c.push(last - prev_memory * dt);
        let predicted = memory(&c, j);
        let corrected = last - (prev_memory + predicted) * (0.5 * dt);
        c[j] = corrected;
        prev_memory = memory(&c, j);
        let mag = corrected.norm();
        if !(mag <= 1.0 + 1e-6) {
            return Err(Error::StepSize {
                time: j as f64 * dt,
                magnitude: mag,
            });
        }
    }
    Ok(SurvivalTrace {
        times: (0..=n).map(|j| j as f64 * dt).collect(),
        amplitudes: c,
        kernel_id: kernel_id.into(),
    })
}

/// K_amp(τ) = α̃² e^{−qτ}, the pseudomode memory kernel.
pub fn exponential_kernel(alpha_tilde_sq: f64, q: f64) -> impl Fn(f64) -> Complex64 {
    move |tau: f64| Complex64::new(alpha_tilde_sq * (-q * tau).exp(), 0.0)
}

/// Upper-left entry of exp(−iHt) for H = [[0, α̃], [α̃, −iq]].
pub fn nonhermitian_amplitude(alpha_tilde_sq: f64, q: f64, t: f64) -> Result<Complex64> {
    let a = Complex64::new(alpha_tilde_sq.sqrt(), 0.0);
    let gen = DenseMatrix::<2> {
        entries: [
            [ZERO, -Complex64::i() * a],
            [-Complex64::i() * a, Complex64::new(-q, 0.0)],
        ],
    };
    Ok(expm_dense(&gen, t)?.entries[0][0])
}

/// Least-squares slope of ln|c(t)| over [t_lo, t_hi].
pub fn fit_log_slope(trace: &SurvivalTrace, t_lo: f64, t_hi: f64) -> Result<f64> {
    let mut n = 0.0;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (t, c) in trace.times.iter().zip(&trace.amplitudes) {
        if *t >= t_lo && *t <= t_hi {
            let y = c.norm().ln();
            n += 1.0;
            sx += t;
            sy += y;
            sxx += t * t;
            sxy += t * y;
        }
    }
    let den = n * sxx - sx * sx;
    if n < 3.0 || !(den > 0.0) {
        return Err(Error::Domain {
            what: "fit window holds fewer than three samples".into(),
        });
    }
    Ok((n * sxy - sx * sy) / den)
}

/// Outcome of matching the pseudomode slow rate to the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConventionFit {
    /// Occupation decay rate R = −2·d ln|c|/dt from the oracle.
    pub rate: f64,
    /// c_conv such that q − r(c_conv) = R at λ = 0.
    pub c_conv: f64,
}

/// Fits c_conv from the survival amplitude of the single-pole Lorentzian
/// α q/(k² + q²), whose amplitude kernel is `kernel_scale`·πα e^{−qτ}.
pub fn fit_convention_constant(
    alpha: f64,
    q: f64,
    kernel_scale: f64,
    dt: f64,
    window: (f64, f64),
) -> Result<ConventionFit> {
    if !(alpha > 0.0 && q > 0.0) {
        return Err(Error::domain_param("convention fit needs alpha > 0 and q > 0"));
    }
    let strength = kernel_scale * PI * alpha;
    let trace = survival_amplitude(exponential_kernel(strength, q), window.1, dt, "lorentzian m=1")?;
    let rate = -2.0 * fit_log_slope(&trace, window.0, window.1)?;
    let r = q - rate;
    Ok(ConventionFit {
        rate,
        c_conv: (q * q - r * r) / (4.0 * alpha),
    })
}
