// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

//! Leggett-Garg-type margins, classical null models and parameter sweeps.
//!
//! For a(t) ∈ [0, 1] any classical process obeys ⟨a(0)a(t)⟩ ≤ ⟨a(t)⟩,
//! i.e. ⟨a(0)||a(t)⟩ ≤ 1, and ⟨a³(t)a(0)⟩⁴ ≤ ⟨a⁴(t)⟩³⟨a⁴(0)⟩. Positive
//! margins certify violation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::curve::{Branch, CorrelationCurve};
use crate::error::{Error, Result};
use crate::perturb::{conditional_cor2, conditional_pt0};
use crate::pseudomode::{PseudomodeModel, PseudomodeParams, CONVENTION_PRINTED};
use crate::spectral::SpectralDensity;

/// Margins above this certify a violation.
pub const VIOLATION_THRESHOLD: f64 = 1e-9;

/// ⟨a(0)||a(t)⟩ − 1 at t, linearly interpolated.
pub fn lg_margin(curve: &CorrelationCurve, t: f64) -> Result<f64> {
    Ok(curve.value_at(t)? - 1.0)
}

pub fn certifies_violation(margin: f64) -> bool {
    margin > VIOLATION_THRESHOLD
}

/// Moments entering the fourth-order inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTuple {
    /// ⟨a³(t)a(0)⟩
    pub c31: f64,
    /// ⟨a⁴(t)⟩
    pub m4t: f64,
    /// ⟨a⁴(0)⟩
    pub m40: f64,
}

impl MomentTuple {
    /// Projector observable (Â⁴ = Â): c31 = ⟨a(0)||a(t)⟩·⟨a(t)⟩.
    pub fn projector(conditional: f64, mean_t: f64, mean_0: f64) -> Self {
        MomentTuple {
            c31: conditional * mean_t,
            m4t: mean_t,
            m40: mean_0,
        }
    }

    /// Quantum decaying projector: ⟨a(t)⟩ = e^{−Rt}, ⟨a(0)||a(t)⟩ = e^{Rt/2}.
    pub fn decaying_projector(rate: f64, t: f64) -> Self {
        Self::projector((0.5 * rate * t).exp(), (-rate * t).exp(), 1.0)
    }
}

/// c31⁴ − m4t³·m40.
pub fn acor_margin(m: &MomentTuple) -> f64 {
    m.c31.powi(4) - m.m4t.powi(3) * m.m40
}

/// Classical Markov chain on {0, 1} with a = indicator of state 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalChain {
    /// 0 → 1 rate
    pub rate_up: f64,
    /// 1 → 0 rate
    pub rate_down: f64,
    /// P(a(0) = 1)
    pub initial: f64,
}

impl ClassicalChain {
    pub fn new(rate_up: f64, rate_down: f64, initial: f64) -> Result<Self> {
        let ok = rate_up >= 0.0
            && rate_down >= 0.0
            && rate_up.is_finite()
            && rate_down.is_finite()
            && (0.0..=1.0).contains(&initial);
        if !ok {
            return Err(Error::domain_param("chain rates must be nonnegative and initial in [0, 1]"));
        }
        Ok(ClassicalChain {
            rate_up,
            rate_down,
            initial,
        })
    }

    /// Pure death process at rate R starting in state 1.
    pub fn death(rate: f64) -> Result<Self> {
        Self::new(0.0, rate, 1.0)
    }

    /// Transition probabilities (P(1|1), P(1|0)) over a lag t, the exact
    /// exponential of the 2×2 generator.
    pub fn transition(&self, t: f64) -> (f64, f64) {
        let s = self.rate_up + self.rate_down;
        if s == 0.0 {
            return (1.0, 0.0);
        }
        let e = (-s * t).exp();
        let pi1 = self.rate_up / s;
        (pi1 + (1.0 - pi1) * e, pi1 * (1.0 - e))
    }

    /// ⟨a(t)⟩
    pub fn mean(&self, t: f64) -> f64 {
        let (p11, p10) = self.transition(t);
        self.initial * p11 + (1.0 - self.initial) * p10
    }

    /// ⟨a(0)a(t)⟩
    pub fn joint(&self, t: f64) -> f64 {
        self.initial * self.transition(t).0
    }

    /// ⟨a(0)a(t)⟩/⟨a(t)⟩
    pub fn conditional(&self, t: f64) -> Result<f64> {
        let m = self.mean(t);
        if !(m > 0.0) {
            return Err(Error::Range {
                what: format!("classical occupation vanishes at t = {t}"),
            });
        }
        Ok(self.joint(t) / m)
    }

    pub fn moments(&self, t: f64) -> MomentTuple {
        // a ∈ {0, 1}: every power of a equals a
        MomentTuple {
            c31: self.joint(t),
            m4t: self.mean(t),
            m40: self.initial,
        }
    }

    pub fn curve(&self, times: &[f64]) -> Result<CorrelationCurve> {
        let values = times.iter().map(|&t| self.conditional(t)).collect::<Result<Vec<_>>>()?;
        let mut p = BTreeMap::new();
        p.insert("rate_up".into(), self.rate_up);
        p.insert("rate_down".into(), self.rate_down);
        p.insert("initial".into(), self.initial);
        CorrelationCurve::new(times.to_vec(), values, Branch::PerturbativePt0, p)
    }
}

/// Sweep coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisName {
    T,
    Q,
    Alpha,
    Lambda,
    K0,
    M,
    /// 4α̃²/q², pseudomode only.
    Coupling,
}

impl AxisName {
    pub const ALL: [AxisName; 7] = [
        AxisName::T,
        AxisName::Q,
        AxisName::Alpha,
        AxisName::Lambda,
        AxisName::K0,
        AxisName::M,
        AxisName::Coupling,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AxisName::T => "t",
            AxisName::Q => "q",
            AxisName::Alpha => "alpha",
            AxisName::Lambda => "lambda",
            AxisName::K0 => "k0",
            AxisName::M => "m",
            AxisName::Coupling => "coupling",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|a| a.as_str() == s)
    }
}

/// Fixed keys that are not sweep axes.
pub const EXTRA_FIXED_KEYS: [&str; 1] = ["c_conv"];

/// Linear range start + (stop − start)·j/(count − 1), j < count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: AxisName,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => alloc::vec![self.start],
            n => (0..n)
                .map(|j| {
                    if j == n - 1 {
                        self.stop
                    } else {
                        self.start + (self.stop - self.start) * j as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

/// Branch selector as spelled in sweep files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepBranch {
    Pt0,
    Cor2,
    Pseudomode,
}

impl SweepBranch {
    pub fn branch(&self) -> Branch {
        match self {
            SweepBranch::Pt0 => Branch::PerturbativePt0,
            SweepBranch::Cor2 => Branch::PerturbativeCor2,
            SweepBranch::Pseudomode => Branch::PseudomodeExact,
        }
    }
}

/// A parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub branch: SweepBranch,
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

fn usage(what: impl Into<String>) -> Error {
    Error::domain_param(what)
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let mut seen = Vec::new();
        for a in &self.axes {
            if a.count == 0 {
                return Err(usage(format!("axis {} needs count >= 1", a.name.as_str())));
            }
            if !(a.start.is_finite() && a.stop.is_finite()) {
                return Err(usage(format!("axis {} bounds must be finite", a.name.as_str())));
            }
            if seen.contains(&a.name) {
                return Err(usage(format!("axis {} repeated", a.name.as_str())));
            }
            if self.fixed.contains_key(a.name.as_str()) {
                return Err(usage(format!("{} is both an axis and fixed", a.name.as_str())));
            }
            seen.push(a.name);
        }
        for (k, v) in &self.fixed {
            if AxisName::parse(k).is_none() && !EXTRA_FIXED_KEYS.contains(&k.as_str()) {
                return Err(usage(format!("unknown fixed parameter {k}")));
            }
            if !v.is_finite() {
                return Err(usage(format!("fixed parameter {k} must be finite")));
            }
        }
        let has = |n: AxisName| seen.contains(&n) || self.fixed.contains_key(n.as_str());
        if !has(AxisName::T) {
            return Err(usage("t must be an axis or fixed"));
        }
        match self.branch {
            SweepBranch::Pseudomode => {
                if has(AxisName::Alpha) == has(AxisName::Coupling) {
                    return Err(usage("pseudomode sweeps need exactly one of alpha or coupling"));
                }
                for n in [AxisName::K0, AxisName::M] {
                    if seen.contains(&n) {
                        return Err(usage(format!("pseudomode sweeps cannot vary {}", n.as_str())));
                    }
                }
                if self.fixed.get("k0").is_some_and(|v| *v != 0.0) || self.fixed.get("m").is_some_and(|v| *v != 1.0)
                {
                    return Err(usage("pseudomode requires k0 = 0 and m = 1"));
                }
            }
            _ => {
                if has(AxisName::Coupling) {
                    return Err(usage("coupling applies to the pseudomode branch only"));
                }
                if !has(AxisName::Alpha) {
                    return Err(usage("alpha must be an axis or fixed"));
                }
            }
        }
        Ok(())
    }

    /// Grid points in lexicographic order, first axis slowest.
    pub fn points(&self) -> Vec<BTreeMap<String, f64>> {
        if self.axes.is_empty() {
            return Vec::new();
        }
        let values: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let total: usize = values.iter().map(Vec::len).product();
        let mut out = Vec::with_capacity(total);
        let mut idx = alloc::vec![0usize; values.len()];
        for _ in 0..total {
            let mut p = self.fixed.clone();
            for (a, (vals, &i)) in self.axes.iter().zip(values.iter().zip(&idx)) {
                p.insert(a.name.as_str().to_string(), vals[i]);
            }
            out.push(p);
            for d in (0..idx.len()).rev() {
                idx[d] += 1;
                if idx[d] < values[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
        out
    }
}

/// Outcome of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationRecord {
    pub t: f64,
    /// ⟨a(0)||a(t)⟩ − 1
    pub margin: f64,
    /// (value − 1)/α for perturbative branches, the raw conditional
    /// average for the pseudomode.
    pub figure_value: f64,
    pub branch: Branch,
    pub parameters: BTreeMap<String, f64>,
    /// None when the point evaluated cleanly.
    pub error: Option<String>,
}

impl ViolationRecord {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    /// q for perturbative branches, 4α̃²/q² for the pseudomode.
    pub fn axis_value(&self) -> f64 {
        let key = if self.branch.is_perturbative() { "q" } else { "coupling" };
        self.parameters.get(key).copied().unwrap_or(f64::NAN)
    }

    pub fn param(&self, key: &str) -> f64 {
        self.parameters.get(key).copied().unwrap_or(f64::NAN)
    }
}

fn get(p: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    p.get(key).copied().unwrap_or(default)
}

fn point_value(branch: SweepBranch, p: &mut BTreeMap<String, f64>, tol: f64) -> Result<(f64, f64)> {
    let t = get(p, "t", f64::NAN);
    let q = get(p, "q", 1.0);
    let lambda = get(p, "lambda", 0.0);
    p.insert("q".into(), q);
    p.insert("lambda".into(), lambda);
    match branch {
        SweepBranch::Pseudomode => {
            let c_conv = get(p, "c_conv", CONVENTION_PRINTED);
            let params = match p.get("coupling") {
                Some(&ratio) => PseudomodeParams::from_coupling_ratio(ratio, q, lambda, c_conv)?,
                None => PseudomodeParams::with_convention(get(p, "alpha", f64::NAN), q, lambda, c_conv)?,
            };
            p.insert("alpha".into(), params.alpha);
            p.insert("coupling".into(), params.coupling_ratio());
            p.insert("c_conv".into(), c_conv);
            p.insert("k0".into(), 0.0);
            p.insert("m".into(), 1.0);
            let value = PseudomodeModel::new(params)?.conditional_avg(t)?;
            Ok((value - 1.0, value))
        }
        _ => {
            let alpha = get(p, "alpha", f64::NAN);
            let k0 = get(p, "k0", 0.0);
            let m = get(p, "m", 1.0);
            p.insert("k0".into(), k0);
            p.insert("m".into(), m);
            if !(m >= 1.0 && m.fract() == 0.0 && m <= u32::MAX as f64) {
                return Err(Error::domain_param("m must be a positive integer"));
            }
            if !(alpha >= 0.0) {
                return Err(Error::domain_param("alpha must be nonnegative"));
            }
            // both formulas are linear in |V|², so (value − 1)/α is evaluated
            // at unit coupling
            let sd = SpectralDensity::lorentzian(1.0, q, k0, m as u32)?;
            let unit = match branch {
                SweepBranch::Pt0 => conditional_pt0(&sd, t, tol)?,
                _ => conditional_cor2(&sd, lambda, t, tol)?,
            } - 1.0;
            Ok((alpha * unit, unit))
        }
    }
}

/// Evaluates one grid point; failures are recorded, not raised.
pub fn evaluate_point(branch: SweepBranch, point: &BTreeMap<String, f64>, tol: f64) -> ViolationRecord {
    let mut parameters = point.clone();
    let t = get(point, "t", f64::NAN);
    let result = point_value(branch, &mut parameters, tol);
    let (margin, figure_value, error) = match result {
        Ok((m, v)) => (m, v, None),
        Err(e) => (f64::NAN, f64::NAN, Some(e.to_string())),
    };
    ViolationRecord {
        t,
        margin,
        figure_value,
        branch: branch.branch(),
        parameters,
        error,
    }
}

/// Sequential sweep in grid order.
pub fn scan_violation(spec: &SweepSpec, tol: f64) -> Result<Vec<ViolationRecord>> {
    spec.validate()?;
    Ok(spec
        .points()
        .iter()
        .map(|p| evaluate_point(spec.branch, p, tol))
        .collect())
}

/// The pseudomode default convention, re-exported for sweep configs.
pub const DEFAULT_C_CONV: f64 = PI;
