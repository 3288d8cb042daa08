// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

//! Elementary functions with removable singularities.

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

const SERIES_RADIUS: f64 = 1e-4;

/// sin(z)/z with sinc(0) = 1.
pub fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        let z2 = z * z;
        Complex64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Real sinc, sin(x)/x.
pub fn sinc_real(x: f64) -> f64 {
    if x.abs() < SERIES_RADIUS {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// cosh(Δt) as a function of Δ² (even in Δ, so the branch of the root is
/// irrelevant and the result is real for real Δ²).
pub fn cosh_sq(delta_sq: f64, t: f64) -> f64 {
    if delta_sq >= 0.0 {
        (delta_sq.sqrt() * t).cosh()
    } else {
        ((-delta_sq).sqrt() * t).cos()
    }
}

/// sinh(Δt)/Δ as a function of Δ²; equals t·sinc(iΔt).
pub fn sinh_over_sq(delta_sq: f64, t: f64) -> f64 {
    let x2 = delta_sq * t * t;
    if x2.abs() < 1e-6 {
        t * (1.0 + x2 / 6.0 + x2 * x2 / 120.0)
    } else if delta_sq > 0.0 {
        let d = delta_sq.sqrt();
        (d * t).sinh() / d
    } else {
        let w = (-delta_sq).sqrt();
        (w * t).sin() / w
    }
}

/// (1 − e^{−z} − z)/z², entire with value −1/2 at the origin.
pub fn exp_remainder2(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        // −Σ_j (−z)^j/(j+2)!
        let mut term = Complex64::new(-0.5, 0.0);
        let mut sum = term;
        for j in 1..30 {
            term = term * (-z) / ((j + 2) as f64);
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (Complex64::new(1.0, 0.0) - (-z).exp() - z) / (z * z)
    }
}

/// Second divided difference of x ↦ e^{xt} at the nodes (u, Δ, −Δ),
/// expressed through Δ². Power series Σ tⁿ/n!·h_{n−2} with the complete
/// homogeneous polynomials h_k = u·h_{k−1} + [k even]·(Δ²)^{k/2}.
pub fn exp_divided_difference_series(u: f64, delta_sq: f64, t: f64) -> f64 {
    let mut h = 1.0; // h_0
    let mut delta_pow = 1.0; // (Δ²)^{k/2} for even k
    let mut coeff = t * t / 2.0; // t^n / n! at n = 2
    let mut sum = coeff * h;
    let mut prev_small = false;
    for k in 1..200usize {
        let n = k + 2;
        if k % 2 == 0 {
            delta_pow *= delta_sq;
            h = u * h + delta_pow;
        } else {
            h *= u;
        }
        coeff *= t / n as f64;
        let term = coeff * h;
        sum += term;
        // at u = 0 every odd term vanishes, so one small term is not enough
        let small = term.abs() <= 1e-18 * sum.abs().max(f64::MIN_POSITIVE);
        if k > 8 && small && prev_small {
            break;
        }
        prev_small = small;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sinc_is_continuous_at_series_switch() {
        for &x in &[0.99e-4, 1.01e-4] {
            let z = Complex64::new(x, 0.0);
            assert!((sinc(z).re - x.sin() / x).abs() < 1e-15);
        }
        assert_eq!(sinc(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn sinc_of_imaginary_is_sinh_ratio() {
        let z = Complex64::new(0.0, 0.7);
        assert_relative_eq!(sinc(z).re, 0.7f64.sinh() / 0.7, epsilon = 1e-15);
        assert_relative_eq!(sinh_over_sq(0.49, 1.0), 0.7f64.sinh() / 0.7, epsilon = 1e-15);
        assert_relative_eq!(sinh_over_sq(-0.49, 2.0), 1.4f64.sin() / 0.7, epsilon = 1e-15);
    }

    #[test]
    fn exp_remainder_matches_closed_form_across_switch() {
        for &(re, im) in &[(0.49, 0.0), (0.3, 0.39), (0.0, 0.499), (0.1, -0.45)] {
            let z = Complex64::new(re, im);
            let series = exp_remainder2(z);
            let closed = (Complex64::new(1.0, 0.0) - (-z).exp() - z) / (z * z);
            assert!((series - closed).norm() < 1e-14, "{z}: {series} vs {closed}");
        }
        assert_eq!(exp_remainder2(Complex64::new(0.0, 0.0)), Complex64::new(-0.5, 0.0));
    }

    #[test]
    fn divided_difference_series_matches_closed_form() {
        for &(u, d2, t) in &[(0.3, 0.04, 1.5), (0.8, -0.5, 2.0), (0.1, 0.0, 3.0)] {
            let closed = ((u * t).exp() - cosh_sq(d2, t) - u * sinh_over_sq(d2, t)) / (u * u - d2);
            let series = exp_divided_difference_series(u, d2, t);
            assert_relative_eq!(series, closed, max_relative = 1e-12);
        }
        // u = 0 with oscillatory Δ: odd-order terms vanish identically
        let w = 3f64.sqrt();
        let closed = (1.0 - (w * 1.0).cos()) / w.powi(2);
        assert_relative_eq!(exp_divided_difference_series(0.0, -3.0, 1.0), closed, max_relative = 1e-14);
        // triple node at zero
        assert_relative_eq!(exp_divided_difference_series(0.0, 0.0, 2.0), 2.0, epsilon = 1e-15);
    }
}
