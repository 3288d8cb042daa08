// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive Gauss–Kronrod quadrature over finite, semi-infinite and
//! infinite ranges, plus Cauchy principal values at a simple pole.
//!
//! Infinite ranges are mapped onto finite ones (x = c + W·u/(1−u²) for the
//! whole line, x = a + W·u/(1−u) for a half line) and integrated with a
//! globally adaptive 21-point Kronrod rule. Callers pass breakpoints and an
//! oscillation frequency through [`LineOptions`]; both become initial
//! subdivision points in the mapped variable.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Default cap on the number of subintervals.
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 20_000;

/// Oscillatory integrands are pre-split at half periods once
/// `frequency · window width` exceeds this.
pub const OSCILLATION_SPLIT_THRESHOLD: f64 = 20.0;

const MAX_OSCILLATION_PIECES: usize = 4096;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Values that can be integrated: `f64` and `Complex64`.
pub trait QuadValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(self) -> f64;
    fn to_complex(self) -> Complex64;
    fn is_finite_value(self) -> bool;
}

impl QuadValue for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Outcome of a converged integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationResult<T> {
    pub value: T,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Convergence target: the error estimate must fall below
/// `max(abs, rel·|value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0 }
    }

    pub fn relative(rel: f64) -> Self {
        Tolerance { abs: 0.0, rel }
    }

    pub fn target(&self, magnitude: f64) -> f64 {
        self.abs.max(self.rel * magnitude)
    }

    fn scaled(&self, factor: f64) -> Self {
        Tolerance {
            abs: self.abs * factor,
            rel: self.rel * factor,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.abs >= 0.0 && self.rel >= 0.0 && (self.abs > 0.0 || self.rel > 0.0);
        if ok && self.abs.is_finite() && self.rel.is_finite() {
            Ok(())
        } else {
            Err(Error::domain_param("tolerance must be positive and finite"))
        }
    }
}

impl From<f64> for Tolerance {
    fn from(abs: f64) -> Self {
        Tolerance::absolute(abs)
    }
}

/// Hints for integrals over unbounded ranges.
#[derive(Debug, Clone, Copy)]
pub struct LineOptions<'a> {
    /// Where the integrand's structure is concentrated.
    pub center: f64,
    /// Width of that structure; sets the mapping scale W.
    pub scale: f64,
    /// Angular frequency of an oscillatory factor (0 for none). Half periods
    /// are measured from the origin.
    pub frequency: f64,
    /// Kinks or discontinuities of the integrand.
    pub breakpoints: &'a [f64],
    /// Subdivision cap.
    pub max_subdivisions: usize,
}

impl Default for LineOptions<'_> {
    fn default() -> Self {
        LineOptions {
            center: 0.0,
            scale: 1.0,
            frequency: 0.0,
            breakpoints: &[],
            max_subdivisions: DEFAULT_MAX_SUBDIVISIONS,
        }
    }
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    floor: f64,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl<T> Eq for Segment<T> {}

impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
fn gk21<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> Segment<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = T::default();
    let mut res_abs = fc.magnitude() * WGK[10];
    let mut fv1 = [T::default(); 10];
    let mut fv2 = [T::default(); 10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k = res_k + (f1 + f2) * WGK[j];
        res_abs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            res_g = res_g + (f1 + f2) * WG[j / 2];
        }
    }

    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).magnitude();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }

    let value = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut err = ((res_k - res_g) * half).magnitude();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    if !value.is_finite_value() {
        err = f64::INFINITY;
    }
    Segment {
        a,
        b,
        value,
        error: err,
        floor,
    }
}

/// Globally adaptive integration over a partition of [a, b] given by sorted
/// `points` (including both endpoints).
fn adaptive<T: QuadValue, F: FnMut(f64) -> T>(
    mut f: F,
    points: &[f64],
    tol: Tolerance,
    max_subdivisions: usize,
) -> Result<IntegrationResult<T>> {
    tol.validate()?;
    let mut heap = BinaryHeap::with_capacity(points.len() + 64);
    let mut evaluations = 0usize;
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(gk21(&mut f, w[0], w[1]));
            evaluations += 21;
        }
    }
    if heap.is_empty() {
        return Ok(IntegrationResult {
            value: T::default(),
            error_estimate: 0.0,
            evaluations: 0,
        });
    }

    let totals = |heap: &BinaryHeap<Segment<T>>| {
        let mut v = T::default();
        let mut e = 0.0;
        let mut floor = 0.0;
        for s in heap.iter() {
            v = v + s.value;
            e += s.error;
            floor += s.floor;
        }
        (v, e, floor)
    };

    let (mut value, mut error, mut floor) = totals(&heap);
    let mut since_refresh = 0usize;
    loop {
        // below twice the accumulated roundoff floor no bisection can help
        let goal = |v: T, fl: f64| tol.target(v.magnitude()).max(2.0 * fl);
        if error <= goal(value, floor) && error.is_finite() {
            let (v, e, fl) = totals(&heap);
            if e <= goal(v, fl) {
                return Ok(IntegrationResult {
                    value: v,
                    error_estimate: e,
                    evaluations,
                });
            }
            value = v;
            error = e;
            floor = fl;
        }
        let worst = *heap.peek().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        let exhausted = heap.len() >= max_subdivisions || mid <= worst.a || mid >= worst.b;
        if exhausted {
            let (v, e, _) = totals(&heap);
            return Err(Error::Integration {
                estimate: v.to_complex(),
                error_estimate: e,
                evaluations,
            });
        }
        heap.pop();
        let left = gk21(&mut f, worst.a, mid);
        let right = gk21(&mut f, mid, worst.b);
        evaluations += 42;
        value = value - worst.value + left.value + right.value;
        error = error - worst.error + left.error + right.error;
        floor = floor - worst.floor + left.floor + right.floor;
        heap.push(left);
        heap.push(right);
        since_refresh += 1;
        if since_refresh == 256 {
            let (v, e, fl) = totals(&heap);
            value = v;
            error = e;
            floor = fl;
            since_refresh = 0;
        }
    }
}

fn sorted_points(mut points: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    points.retain(|p| p.is_finite() && *p > lo && *p < hi);
    points.push(lo);
    points.push(hi);
    points.sort_by(|a, b| a.total_cmp(b));
    points.dedup();
    points
}

/// Half-period split points x = jπ/ω inside [lo, hi], when warranted.
fn oscillation_points(frequency: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let omega = frequency.abs();
    if omega == 0.0 || !(omega * (hi - lo) > OSCILLATION_SPLIT_THRESHOLD) {
        return out;
    }
    let mut step = PI / omega;
    let count = (hi - lo) / step;
    if count > MAX_OSCILLATION_PIECES as f64 {
        step *= (count / MAX_OSCILLATION_PIECES as f64).ceil();
    }
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    for j in first..=last {
        out.push(j as f64 * step);
    }
    out
}

/// Integral of `f` over the finite interval [a, b].
pub fn integrate<T: QuadValue, F: FnMut(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    tol: impl Into<Tolerance>,
) -> Result<IntegrationResult<T>> {
    integrate_with_breaks(f, a, b, &[], tol)
}

/// Integral over [a, b] with the given interior breakpoints as initial
/// subdivision. Reversed bounds flip the sign.
pub fn integrate_with_breaks<T: QuadValue, F: FnMut(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: impl Into<Tolerance>,
) -> Result<IntegrationResult<T>> {
    let tol = tol.into();
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain_param("finite bounds required"));
    }
    if b < a {
        let mut r = integrate_with_breaks(f, b, a, breakpoints, tol)?;
        r.value = r.value * -1.0;
        return Ok(r);
    }
    let points = sorted_points(breakpoints.to_vec(), a, b);
    adaptive(f, &points, tol, DEFAULT_MAX_SUBDIVISIONS)
}

/// Integral over the whole real line with default hints.
pub fn integrate_line<T: QuadValue, F: FnMut(f64) -> T>(
    f: F,
    tol: impl Into<Tolerance>,
) -> Result<IntegrationResult<T>> {
    integrate_line_with(f, &LineOptions::default(), tol)
}

/// Integral over (−∞, ∞) via x = c + W·u/(1−u²), u ∈ (−1, 1).
pub fn integrate_line_with<T: QuadValue, F: FnMut(f64) -> T>(
    mut f: F,
    opts: &LineOptions<'_>,
    tol: impl Into<Tolerance>,
) -> Result<IntegrationResult<T>> {
    let tol = tol.into();
    let w = opts.scale;
    let c = opts.center;
    if !(w > 0.0 && w.is_finite() && c.is_finite()) {
        return Err(Error::domain_param("line integration needs a positive finite scale"));
    }
    let to_u = |x: f64| {
        let y = x - c;
        2.0 * y / (w + (w * w + 4.0 * y * y).sqrt())
    };

    let mut xs: Vec<f64> = opts.breakpoints.to_vec();
    xs.push(c);
    // The window the oscillation split covers: a generous multiple of the
    // structure width around the center and the origin.
    let reach = 40.0 * w + c.abs();
    xs.extend(oscillation_points(opts.frequency, -reach, reach));
    let us: Vec<f64> = xs.into_iter().map(to_u).collect();
    let points = sorted_points(us, -1.0, 1.0);

    let g = |u: f64| {
        let d = 1.0 - u * u;
        if d <= 0.0 {
            return T::default();
        }
        let x = c + w * u / d;
        let jac = w * (1.0 + u * u) / (d * d);
        let v = f(x);
        if jac.is_finite() {
            v * jac
        } else {
            T::default()
        }
    };
    adaptive(g, &points, tol, opts.max_subdivisions)
}

/// Integral over [a, ∞) via x = a + W·u/(1−u), u ∈ [0, 1).
pub fn integrate_semi_infinite<T: QuadValue, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    opts: &LineOptions<'_>,
    tol: impl Into<Tolerance>,
) -> Result<IntegrationResult<T>> {
    let tol = tol.into();
    let w = opts.scale;
    if !(w > 0.0 && w.is_finite() && a.is_finite()) {
        return Err(Error::domain_param("half-line integration needs a finite start and scale"));
    }
    let to_u = |x: f64| (x - a) / (w + x - a);
    let reach = a + 40.0 * w + opts.center.abs();
    let mut xs: Vec<f64> = opts.breakpoints.to_vec();
    xs.push(opts.center);
    xs.extend(oscillation_points(opts.frequency, a, reach.max(a)));
    let us: Vec<f64> = xs.into_iter().filter(|x| *x > a).map(to_u).collect();
    let points = sorted_points(us, 0.0, 1.0);

    let g = |u: f64| {
        let d = 1.0 - u;
        if d <= 0.0 {
            return T::default();
        }
        let x = a + w * u / d;
        let jac = w / (d * d);
        let v = f(x);
        if jac.is_finite() {
            v * jac
        } else {
            T::default()
        }
    };
    adaptive(g, &points, tol, opts.max_subdivisions)
}

/// Integral over (−∞, b].
pub fn integrate_to<T: QuadValue, F: FnMut(f64) -> T>(
    mut f: F,
    b: f64,
    opts: &LineOptions<'_>,
    tol: impl Into<Tolerance>,
) -> Result<IntegrationResult<T>> {
    let flipped: Vec<f64> = opts.breakpoints.iter().map(|x| -x).collect();
    let o = LineOptions {
        center: -opts.center,
        breakpoints: &flipped,
        ..*opts
    };
    integrate_semi_infinite(|x| f(-x), -b, &o, tol)
}

/// Half-width of the central window used by [`integrate_fourier`], in
/// units of the structure scale.
pub const FOURIER_WINDOW: f64 = 20.0;

const MAX_TAIL_CYCLES: usize = 2000;
const WYNN_DEPTH: usize = 40;

/// Wynn ε-algorithm over the partial sums; returns the last even-column
/// diagonal entry.
fn wynn_epsilon(sums: &[Complex64]) -> Complex64 {
    let n = sums.len();
    if n < 3 {
        return sums[n - 1];
    }
    // prev2: column k−1, prev: column k
    let mut prev2: Vec<Complex64> = alloc::vec![Complex64::new(0.0, 0.0); n + 1];
    let mut prev: Vec<Complex64> = sums.to_vec();
    let mut best = sums[n - 1];
    let mut k = 0usize;
    while prev.len() > 1 {
        let mut next = Vec::with_capacity(prev.len() - 1);
        for j in 0..prev.len() - 1 {
            let d = prev[j + 1] - prev[j];
            if d.norm() == 0.0 || !d.re.is_finite() || !d.im.is_finite() {
                return best;
            }
            next.push(prev2[j + 1] + Complex64::new(1.0, 0.0) / d);
        }
        k += 1;
        if k.is_multiple_of(2) {
            let candidate = next[next.len() - 1];
            if candidate.re.is_finite() && candidate.im.is_finite() {
                best = candidate;
            } else {
                return best;
            }
        }
        prev2 = prev;
        prev = next;
    }
    best
}

/// ∫_a^∞ g(x) e^{iωx} dx for a smooth, decaying, non-oscillatory g.
///
/// The range is cut into half periods π/|ω| starting at `a`; each piece is
/// integrated adaptively and the partial sums are accelerated with the
/// Wynn ε-algorithm.
pub fn integrate_oscillatory_tail<F: FnMut(f64) -> Complex64>(
    mut g: F,
    a: f64,
    omega: f64,
    tol: impl Into<Tolerance>,
) -> Result<IntegrationResult<Complex64>> {
    let tol = tol.into();
    tol.validate()?;
    if !(a.is_finite() && omega.is_finite() && omega != 0.0) {
        return Err(Error::domain_param("oscillatory tail needs finite start and nonzero frequency"));
    }
    let step = PI / omega.abs();
    let piece_tol = tol.scaled(1e-2);
    let mut sums: Vec<Complex64> = Vec::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut piece_err = 0.0;
    let mut evaluations = 0;
    let mut last_estimates: [Complex64; 3] = [Complex64::new(f64::NAN, 0.0); 3];
    for j in 0..MAX_TAIL_CYCLES {
        let lo = a + j as f64 * step;
        let hi = lo + step;
        let r = integrate(|x: f64| g(x) * Complex64::new(0.0, omega * x).exp(), lo, hi, piece_tol)?;
        evaluations += r.evaluations;
        piece_err += r.error_estimate;
        total += r.value;
        sums.push(total);
        if sums.len() > WYNN_DEPTH {
            sums.remove(0);
        }
        let estimate = wynn_epsilon(&sums);
        last_estimates = [last_estimates[1], last_estimates[2], estimate];
        if j >= 4 {
            let spread = (last_estimates[2] - last_estimates[1]).norm()
                + (last_estimates[2] - last_estimates[0]).norm();
            let small_terms = r.value.norm() <= tol.target(total.norm()) * 1e-3;
            if spread.is_finite() && spread + piece_err <= tol.target(estimate.norm()) {
                return Ok(IntegrationResult {
                    value: estimate,
                    error_estimate: spread + piece_err,
                    evaluations,
                });
            }
            if small_terms && j > 8 {
                return Ok(IntegrationResult {
                    value: total,
                    error_estimate: r.value.norm() * 10.0 + piece_err,
                    evaluations,
                });
            }
        }
    }
    Err(Error::Integration {
        estimate: last_estimates[2],
        error_estimate: f64::NAN,
        evaluations,
    })
}

/// ∫ g(k) e^{iωk} dk over the real line for smooth, non-oscillatory g.
///
/// The central window [c − X, c + X] with X = FOURIER_WINDOW·scale + |c| is
/// integrated directly (split at half periods when ω·2X exceeds the
/// threshold); the two tails go through [`integrate_oscillatory_tail`].
pub fn integrate_fourier<F: FnMut(f64) -> Complex64>(
    mut g: F,
    omega: f64,
    opts: &LineOptions<'_>,
    tol: impl Into<Tolerance>,
) -> Result<IntegrationResult<Complex64>> {
    let tol = tol.into();
    if omega == 0.0 {
        return integrate_line_with(g, opts, tol);
    }
    let (mut lo, mut hi) = fourier_window(opts);
    // keep the central window within the half-period piece budget
    let budget = MAX_OSCILLATION_PIECES as f64 * PI / omega.abs();
    if hi - lo > budget {
        let c = opts.center.clamp(lo, hi);
        lo = c - 0.5 * budget;
        hi = c + 0.5 * budget;
    }
    let part = tol.scaled(1.0 / 3.0);
    let central = integrate_window(
        |k: f64| g(k) * Complex64::new(0.0, omega * k).exp(),
        lo,
        hi,
        omega,
        opts.breakpoints,
        part,
    )?;
    let right = integrate_oscillatory_tail(&mut g, hi, omega, part)?;
    let left = integrate_oscillatory_tail(|y: f64| g(-y), -lo, -omega, part)?;
    Ok(IntegrationResult {
        value: central.value + right.value + left.value,
        error_estimate: central.error_estimate + right.error_estimate + left.error_estimate,
        evaluations: central.evaluations + right.evaluations + left.evaluations,
    })
}

/// The central window used by [`integrate_fourier`].
pub fn fourier_window(opts: &LineOptions<'_>) -> (f64, f64) {
    let reach = FOURIER_WINDOW * opts.scale + opts.center.abs();
    (opts.center - reach, opts.center + reach)
}

/// Finite-interval integration with half-period pre-splitting at
/// frequency ω and the given breakpoints.
pub fn integrate_window<T: QuadValue, F: FnMut(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    omega: f64,
    breakpoints: &[f64],
    tol: impl Into<Tolerance>,
) -> Result<IntegrationResult<T>> {
    let mut points = breakpoints.to_vec();
    points.extend(oscillation_points(omega, a, b));
    integrate_with_breaks(f, a, b, &points, tol)
}

/// Where a principal-value integral runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PvRange {
    /// The whole real line.
    Line,
    /// A finite window [a, b] containing the pole.
    Window(f64, f64),
}

/// Settings for [`integrate_pv_with`].
#[derive(Debug, Clone, Copy)]
pub struct PvOptions<'a> {
    pub range: PvRange,
    /// First excision radius ε₀; later radii are ε₀/2ʲ.
    pub radius: f64,
    /// Hints for the outer (pole-free) integrals.
    pub line: LineOptions<'a>,
    /// Number of halvings before giving up.
    pub max_levels: usize,
}

impl Default for PvOptions<'_> {
    fn default() -> Self {
        PvOptions {
            range: PvRange::Line,
            radius: 1.0,
            line: LineOptions::default(),
            max_levels: 30,
        }
    }
}

/// Cauchy principal value over the whole line at a simple pole.
pub fn integrate_pv<F: FnMut(f64) -> f64>(
    f: F,
    pole: f64,
    tol: impl Into<Tolerance>,
) -> Result<IntegrationResult<f64>> {
    integrate_pv_with(f, pole, &PvOptions::default(), tol)
}

/// Principal value by symmetric excision ∫_{|x−p|>ε} f with ε = ε₀/2ʲ,
/// Richardson-extrapolated to ε → 0.
///
/// For f = c/(x−p) + g(x) with g smooth, the excised integral is an odd
/// power series in ε, so the table eliminates ε, ε³, ε⁵, …. The shells
/// between successive radii are integrated as f(p+u) + f(p−u), where the
/// pole cancels. Shells that stop shrinking signal a higher-order pole.
pub fn integrate_pv_with<F: FnMut(f64) -> f64>(
    mut f: F,
    pole: f64,
    opts: &PvOptions<'_>,
    tol: impl Into<Tolerance>,
) -> Result<IntegrationResult<f64>> {
    let tol = tol.into();
    tol.validate()?;
    if !pole.is_finite() {
        return Err(Error::domain_param("pole must be finite"));
    }
    let mut eps0 = opts.radius;
    if let PvRange::Window(a, b) = opts.range {
        if !(a < pole && pole < b) {
            return Err(Error::domain_param("window must contain the pole"));
        }
        eps0 = eps0.min(pole - a).min(b - pole);
    }
    if !(eps0 > 0.0 && eps0.is_finite()) {
        return Err(Error::domain_param("excision radius must be positive"));
    }

    let outer_tol = tol.scaled(0.25);
    let (outer, mut evaluations, mut err_sum) = match opts.range {
        PvRange::Line => {
            let left = integrate_to(&mut f, pole - eps0, &opts.line, outer_tol)?;
            let right = integrate_semi_infinite(&mut f, pole + eps0, &opts.line, outer_tol)?;
            (
                left.value + right.value,
                left.evaluations + right.evaluations,
                left.error_estimate + right.error_estimate,
            )
        }
        PvRange::Window(a, b) => {
            let left = integrate_with_breaks(&mut f, a, pole - eps0, opts.line.breakpoints, outer_tol)?;
            let right = integrate_with_breaks(&mut f, pole + eps0, b, opts.line.breakpoints, outer_tol)?;
            (
                left.value + right.value,
                left.evaluations + right.evaluations,
                left.error_estimate + right.error_estimate,
            )
        }
    };

    // Previous row of the Richardson table; column k has ε^(2k−1) removed.
    let mut prev: Vec<f64> = alloc::vec![outer];
    let mut excised = outer;
    let mut last_shell = f64::NAN;
    let mut growing = 0usize;
    let mut eps = eps0;
    let mut best = outer;
    let mut best_diff = f64::INFINITY;

    for level in 1..=opts.max_levels {
        let inner = eps * 0.5;
        let shell_tol = tol.scaled(0.25 / (1u64 << level.min(40)) as f64);
        let shell = integrate(|u: f64| f(pole + u) + f(pole - u), inner, eps, shell_tol)?;
        evaluations += shell.evaluations;
        err_sum += shell.error_estimate;
        let s = shell.value;
        if !s.is_finite() {
            return Err(Error::PoleOrder { pole });
        }
        if last_shell.is_finite() && s.abs() > tol.target(excised.abs()) {
            if s.abs() > 0.9 * last_shell.abs() {
                growing += 1;
            } else {
                growing = 0;
            }
            if growing >= 3 {
                return Err(Error::PoleOrder { pole });
            }
        }
        last_shell = s;
        excised += s;
        eps = inner;

        let mut row = alloc::vec![excised];
        // High columns amplify noise; eight is plenty.
        for k in 1..=prev.len().min(7) {
            let factor = (1u64 << (2 * k - 1)) as f64;
            let r = row[k - 1] + (row[k - 1] - prev[k - 1]) / (factor - 1.0);
            row.push(r);
        }
        let diag = row[row.len() - 1];
        let diff = (diag - prev[prev.len() - 1]).abs();
        prev = row;
        if diff < best_diff {
            best_diff = diff;
            best = diag;
        }
        if level >= 3 && diff + err_sum <= tol.target(diag.abs()) {
            return Ok(IntegrationResult {
                value: diag,
                error_estimate: diff + err_sum,
                evaluations,
            });
        }
    }
    Err(Error::Integration {
        estimate: Complex64::new(best, 0.0),
        error_estimate: best_diff + err_sum,
        evaluations,
    })
}
