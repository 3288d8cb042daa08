// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use weakdecay_core::oracle::{eigenvalues, expm_dense, DenseMatrix};
use weakdecay_core::pseudomode::{
    liouvillian_matrix, mat_mul, solve_r, PseudomodeModel, PseudomodeParams, CONVENTION_PRINTED,
};

fn ratio(r: f64, q: f64, lambda: f64) -> PseudomodeParams {
    PseudomodeParams::from_coupling_ratio(r, q, lambda, CONVENTION_PRINTED).unwrap()
}

#[test]
fn slow_rate_has_a_kink_at_the_coupling_threshold() {
    // λ = 0: q − r = q(1 − √(1 − x)) below x = 4α̃²/q² = 1, q above
    let h = 1e-4;
    let rate = |x: f64| PseudomodeModel::new(ratio(x, 1.0, 0.0)).unwrap().slow_rate();
    let left = (rate(1.0 - h) - rate(1.0 - 2.0 * h)) / h;
    let right = (rate(1.0 + 2.0 * h) - rate(1.0 + h)) / h;
    assert!(left > 30.0, "{left}");
    assert_eq!(right, 0.0);
    // measurement smooths it out
    let smooth = |x: f64| PseudomodeModel::new(ratio(x, 1.0, 0.5)).unwrap().slow_rate();
    let l = (smooth(1.0) - smooth(1.0 - h)) / h;
    let r = (smooth(1.0 + h) - smooth(1.0)) / h;
    assert!((l - r).abs() < 1e-3 * l.abs());
}

#[test]
fn zeno_limit_pushes_root_to_q() {
    let mut last = 0.0;
    for &lambda in &[0.1, 1.0, 10.0, 100.0, 1e4] {
        let r = solve_r(&ratio(0.8, 1.0, lambda)).unwrap();
        assert!(r > last);
        last = r;
    }
    assert!(1.0 - last < 1e-4);
}

#[test]
fn stationary_state_is_the_slow_eigenvector() {
    for &(x, lambda) in &[(0.3, 0.0), (0.9, 0.2), (2.5, 0.05)] {
        let p = ratio(x, 1.3, lambda);
        let model = PseudomodeModel::new(p).unwrap();
        let v = model.stationary_state().unwrap().as_array();
        let l = liouvillian_matrix(&p);
        let slow = model.r() - p.q;
        for i in 0..3 {
            let lv: f64 = (0..3).map(|j| l[i][j] * v[j]).sum();
            assert!((lv - slow * v[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn eigenvalues_agree_with_characteristic_polynomial_roots() {
    for &(x, lambda) in &[(0.4, 0.0), (1.7, 0.0), (0.7, 0.3), (3.0, 2.0)] {
        let p = ratio(x, 0.9, lambda);
        let model = PseudomodeModel::new(p).unwrap();
        let shifted = model.eigenvalues().map(|e| e - p.q);
        let oracle = eigenvalues(&DenseMatrix::<3>::from_real(&liouvillian_matrix(&p))).unwrap();
        for e in shifted {
            let nearest = oracle.iter().map(|o| (o - e).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-9, "{e} not in {oracle:?}");
        }
    }
}

#[test]
fn conditional_average_violates_in_the_overdamped_regime() {
    for &x in &[0.1, 0.5, 0.9] {
        for &lambda in &[0.0, 0.01, 1.0] {
            let model = PseudomodeModel::new(ratio(x, 1.0, lambda)).unwrap();
            assert!((model.conditional_avg(0.0).unwrap() - 1.0).abs() < 1e-14);
            for j in 1..=50 {
                assert!(model.conditional_avg(0.2 * j as f64).unwrap() > 1.0);
            }
        }
    }
}

proptest! {
    #[test]
    fn propagator_is_a_semigroup(
        x in 0.01f64..5.0, q in 0.2f64..3.0, lambda in 0.0f64..3.0, s in 0.0f64..4.0, t in 0.0f64..4.0,
    ) {
        let model = PseudomodeModel::new(ratio(x, q, lambda)).unwrap();
        let prod = mat_mul(&model.propagator(s).unwrap(), &model.propagator(t).unwrap());
        let joint = model.propagator(s + t).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((prod[i][j] - joint[i][j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn propagator_matches_expm(x in 0.01f64..5.0, q in 0.2f64..3.0, lambda in 0.0f64..3.0, t in 0.0f64..8.0) {
        let p = ratio(x, q, lambda);
        let ch = PseudomodeModel::new(p).unwrap().propagator(t).unwrap();
        let ex = expm_dense(&DenseMatrix::<3>::from_real(&liouvillian_matrix(&p)), t).unwrap();
        let diff = DenseMatrix::<3>::from_real(&ch).max_abs_diff(&ex);
        prop_assert!(diff < 1e-10, "{diff}");
        prop_assert!(ex.max_imag() < 1e-14);
    }

    #[test]
    fn root_lies_in_range_with_small_residual(x in 0.0f64..10.0, q in 0.05f64..5.0, lambda in 0.0f64..20.0) {
        let p = ratio(x, q, lambda);
        let r = solve_r(&p).unwrap();
        prop_assert!((0.0..=q).contains(&r));
        prop_assert!(p.cubic_residual(r).abs() < 1e-12 * (1.0 + lambda) * q * q * (1.0 + x));
    }
}
