// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

//! Sampled conditional averages t ↦ ⟨a(0)||a(t)⟩_Q.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which model produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Lowest order in the coupling, noninvasive limit λ → 0.
    PerturbativePt0,
    /// Lowest order in the coupling, finite measurement strength λ.
    PerturbativeCor2,
    /// Exact single-pseudomode solution of the Lorentzian m = 1 reservoir.
    PseudomodeExact,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::PerturbativePt0 => "perturbative_pt0",
            Branch::PerturbativeCor2 => "perturbative_cor2",
            Branch::PseudomodeExact => "pseudomode_exact",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "perturbative_pt0" | "pt0" => Some(Branch::PerturbativePt0),
            "perturbative_cor2" | "cor2" => Some(Branch::PerturbativeCor2),
            "pseudomode_exact" | "pseudomode" => Some(Branch::PseudomodeExact),
            _ => None,
        }
    }

    pub fn is_perturbative(&self) -> bool {
        !matches!(self, Branch::PseudomodeExact)
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A correlation curve with the model inputs that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub branch: Branch,
    pub parameters: BTreeMap<String, f64>,
}

impl CorrelationCurve {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        branch: Branch,
        parameters: BTreeMap<String, f64>,
    ) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Domain {
                what: "curve times and values differ in length".into(),
            });
        }
        if times.is_empty() {
            return Err(Error::Domain {
                what: "curve has no samples".into(),
            });
        }
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Domain {
                what: "curve times must be finite and nonnegative".into(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain {
                what: "curve times must be strictly increasing".into(),
            });
        }
        Ok(CorrelationCurve {
            times,
            values,
            branch,
            parameters,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Linear interpolation inside the sampled range.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        let first = self.times[0];
        let last = self.times[self.times.len() - 1];
        if !(t >= first && t <= last) {
            return Err(Error::Range {
                what: alloc::format!("t = {t} outside sampled range [{first}, {last}]"),
            });
        }
        let idx = self.times.partition_point(|&s| s <= t);
        if idx == 0 {
            return Ok(self.values[0]);
        }
        if idx == self.times.len() {
            return Ok(self.values[idx - 1]);
        }
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        Ok(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }

    /// Whether the samples sit on a uniform grid to relative precision
    /// `rel`, and the step if so.
    pub fn uniform_step(&self, rel: f64) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let n = self.times.len() - 1;
        let h = (self.times[n] - self.times[0]) / n as f64;
        let uniform = self
            .times
            .iter()
            .enumerate()
            .all(|(i, &t)| (t - (self.times[0] + i as f64 * h)).abs() <= rel * h);
        uniform.then_some(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sample() -> CorrelationCurve {
        CorrelationCurve::new(
            vec![0.0, 1.0, 3.0],
            vec![1.0, 2.0, 0.0],
            Branch::PerturbativePt0,
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn interpolation_and_range() {
        let c = sample();
        assert_eq!(c.value_at(0.0).unwrap(), 1.0);
        assert_eq!(c.value_at(0.5).unwrap(), 1.5);
        assert_eq!(c.value_at(2.0).unwrap(), 1.0);
        assert_eq!(c.value_at(3.0).unwrap(), 0.0);
        assert!(matches!(c.value_at(3.5), Err(Error::Range { .. })));
        assert!(c.uniform_step(1e-9).is_none());
    }

    #[test]
    fn rejects_bad_grids() {
        let p = BTreeMap::new();
        assert!(CorrelationCurve::new(vec![0.0, 0.0], vec![1.0, 1.0], Branch::PseudomodeExact, p.clone()).is_err());
        assert!(CorrelationCurve::new(vec![-1.0, 0.0], vec![1.0, 1.0], Branch::PseudomodeExact, p.clone()).is_err());
        assert!(CorrelationCurve::new(vec![0.0], vec![1.0, 1.0], Branch::PseudomodeExact, p).is_err());
    }

    #[test]
    fn branch_names_round_trip() {
        for b in [Branch::PerturbativePt0, Branch::PerturbativeCor2, Branch::PseudomodeExact] {
            assert_eq!(Branch::parse(b.as_str()), Some(b));
        }
        assert_eq!(Branch::parse("cor2"), Some(Branch::PerturbativeCor2));
        assert_eq!(Branch::parse("nope"), None);
    }
}
