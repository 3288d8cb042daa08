// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

use approx::assert_relative_eq;
use weakdecay_core::perturb::{
    conditional_cor2, conditional_pt0, decay_rate_lambda, decay_shift, decaying_wavefunctions, extract_potential_many,
    pt0_curve, saturation, solve_gamma, DEFAULT_EPSILON,
};
use weakdecay_core::spectral::{RealSpacePotential, SpectralDensity};

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect()
}

#[test]
fn measurement_shift_of_decay_rate_is_minus_two_lambda_saturation() {
    let lambda = 1e-3;
    for &(c, bound) in &[(0.01, 3e-3), (0.003, 5e-4)] {
        let rp = RealSpacePotential::exponential(c, 1.0).unwrap();
        let sd = rp.exponential_density().unwrap();
        let gamma = solve_gamma(&sd, DEFAULT_EPSILON, 1e-14).unwrap().gamma;
        let profile = decaying_wavefunctions(&rp, gamma, &linspace(-40.0, 40.0, 8001), 1e-13).unwrap();
        let shift = decay_shift(&profile, lambda).unwrap();
        let expected = -2.0 * lambda * saturation(&sd, 1e-14).unwrap();
        assert!((shift / expected - 1.0).abs() < bound, "c = {c}: {shift} vs {expected}");
    }
}

#[test]
fn rate_slope_at_small_lambda_for_higher_order_lorentzians() {
    for &(m, k0) in &[(2u32, 0.0), (3, 0.4)] {
        let sd = SpectralDensity::lorentzian(0.2, 1.3, k0, m).unwrap();
        let h = 1e-4;
        let slope = (decay_rate_lambda(&sd, 2.0 * h, 1e-13).unwrap() - decay_rate_lambda(&sd, h, 1e-13).unwrap()) / h;
        let sat = saturation(&sd, 1e-13).unwrap();
        assert!(((slope + 2.0 * sat) / (2.0 * sat)).abs() < 2e-3, "m = {m}: {slope} vs {}", -2.0 * sat);
    }
}

#[test]
fn rate_tends_to_peak_density_and_vanishes_under_zeno_measurement() {
    let sd = SpectralDensity::lorentzian(0.5, 0.8, 0.3, 2).unwrap();
    assert_relative_eq!(decay_rate_lambda(&sd, 1e-10, 1e-13).unwrap(), sd.at_zero(), max_relative = 1e-8);
    let strong = decay_rate_lambda(&sd, 1e4, 1e-13).unwrap();
    assert!(strong < 1e-3 * sd.at_zero());
}

#[test]
fn pt0_saturates_at_one_plus_saturation() {
    for &(m, k0) in &[(1u32, 0.0), (2, 0.0), (2, 0.7)] {
        let sd = SpectralDensity::lorentzian(0.05, 1.0, k0, m).unwrap();
        let late = conditional_pt0(&sd, 200.0, 1e-12).unwrap();
        assert_relative_eq!(late - 1.0, saturation(&sd, 1e-12).unwrap(), max_relative = 1e-6);
    }
}

#[test]
fn cor2_interpolates_between_pt0_and_unity() {
    let sd = SpectralDensity::lorentzian(0.1, 1.0, 0.0, 1).unwrap();
    for &t in &[0.5, 2.0, 8.0] {
        let pt0 = conditional_pt0(&sd, t, 1e-12).unwrap();
        let weak = conditional_cor2(&sd, 1e-9, t, 1e-12).unwrap();
        assert!((weak - pt0).abs() < 1e-8);
        let strong = conditional_cor2(&sd, 50.0, t, 1e-12).unwrap();
        assert!((strong - 1.0).abs() < (pt0 - 1.0).abs());
    }
}

#[test]
fn extraction_recovers_shifted_density_symmetrized() {
    let sd = SpectralDensity::lorentzian(0.01, 1.0, 0.5, 1).unwrap();
    let curve = pt0_curve(&sd, &linspace(0.0, 40.0, 2001), 1e-12).unwrap();
    let ks = linspace(0.0, 4.0, 9);
    for e in extract_potential_many(&curve, &ks).unwrap() {
        let exact = sd.eval(e.k) + sd.eval(-e.k);
        assert!(((e.value - exact) / exact).abs() < 0.02, "k = {}: {} vs {exact}", e.k, e.value);
    }
}
