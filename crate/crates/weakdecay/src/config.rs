// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

//! JSON experiment records read from a file or standard input.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use weakdecay_core::lg::{Axis, AxisName, SweepBranch, SweepSpec};

use crate::error::{CliError, CliResult};

/// Configuration of `curve` and `scan`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub branch: SweepBranch,
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    /// Tabulated |V(k)|² replacing the Lorentzian family (curve only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_csv: Option<String>,
}

impl RunConfig {
    pub fn sweep(&self) -> SweepSpec {
        SweepSpec {
            branch: self.branch,
            axes: self.axes.clone(),
            fixed: self.fixed.clone(),
            output_path: self.output_path.clone(),
        }
    }

    /// The single t axis of a curve request.
    pub fn validate_curve(&self) -> CliResult<Axis> {
        let axis = match self.axes.as_slice() {
            [a] if a.name == AxisName::T => *a,
            _ => return Err(CliError::usage("curve needs exactly one axis, named t")),
        };
        if self.density_csv.is_some() {
            if self.branch == SweepBranch::Pseudomode {
                return Err(CliError::usage("tabulated densities apply to pt0 and cor2 only"));
            }
            if let Some(k) = self.fixed.keys().find(|k| k.as_str() != "lambda") {
                return Err(CliError::usage(format!("{k} cannot be fixed alongside a tabulated density")));
            }
        } else {
            self.sweep().validate().map_err(CliError::usage)?;
        }
        if axis.count > 1 && !(axis.stop > axis.start) {
            return Err(CliError::usage("t axis must increase"));
        }
        if !(axis.start >= 0.0) {
            return Err(CliError::usage("t axis must start at t >= 0"));
        }
        Ok(axis)
    }

    pub fn validate_scan(&self) -> CliResult<()> {
        if self.axes.len() != 2 {
            return Err(CliError::usage("scan needs exactly two axes"));
        }
        if self.density_csv.is_some() {
            return Err(CliError::usage("scan does not accept a tabulated density"));
        }
        self.sweep().validate().map_err(CliError::usage)
    }
}

/// Configuration of `extract`; command-line flags fill or override fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

impl ExtractConfig {
    /// Momenta 0, k_max/(n−1), …, k_max.
    pub fn momenta(&self) -> CliResult<Vec<f64>> {
        let k_max = self.k_max.ok_or_else(|| CliError::usage("extract needs k_max"))?;
        let n = self.k_count.ok_or_else(|| CliError::usage("extract needs k_count"))?;
        if !(k_max >= 0.0 && k_max.is_finite()) {
            return Err(CliError::usage("k_max must be finite and nonnegative"));
        }
        Ok(match n {
            0 => return Err(CliError::usage("k_count must be at least 1")),
            1 => vec![0.0],
            n => (0..n).map(|j| k_max * j as f64 / (n - 1) as f64).collect(),
        })
    }
}

/// Reads the config text from `path`, or from standard input when absent.
pub fn read_source(path: Option<&Path>) -> CliResult<String> {
    match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", p.display()))),
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::usage(format!("cannot read config from stdin: {e}")))?;
            Ok(s)
        }
    }
}

pub fn parse<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::usage(format!("invalid config: {e}")))
}

pub fn output_path(p: &Option<String>) -> Option<PathBuf> {
    p.as_ref().map(PathBuf::from)
}
