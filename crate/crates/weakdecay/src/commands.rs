// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

//! The `curve`, `scan` and `extract` commands as library calls returning
//! the bytes to emit.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};
use weakdecay_core::lg::{evaluate_point, AxisName, SweepBranch, ViolationRecord};
use weakdecay_core::perturb::{conditional_cor2, conditional_pt0, extract_potential_many};
use weakdecay_core::pseudomode::{PseudomodeModel, PseudomodeParams, CONVENTION_PRINTED};
use weakdecay_core::spectral::SpectralDensity;
use weakdecay_core::{Branch, CorrelationCurve, Error};

use crate::config::{ExtractConfig, RunConfig};
use crate::error::{CliError, CliResult};
use crate::format;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Settings shared by all commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub jobs: usize,
    pub tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            jobs: 1,
            tol: DEFAULT_TOL,
        }
    }
}

impl RunOptions {
    pub fn validate(&self) -> CliResult<()> {
        if self.jobs == 0 {
            return Err(CliError::usage("--jobs must be at least 1"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::usage("--tol must be positive"));
        }
        Ok(())
    }

    fn pool(&self) -> CliResult<rayon::ThreadPool> {
        self.validate()?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| CliError::Numeric(format!("cannot start worker pool: {e}")))
    }
}

/// Parameter-domain failures are the caller's fault.
fn classify(e: Error) -> CliError {
    match e {
        Error::ParameterDomain { .. } => CliError::Usage(e.to_string()),
        other => CliError::Numeric(other.to_string()),
    }
}

fn fixed(cfg: &RunConfig, key: &str, default: f64) -> f64 {
    cfg.fixed.get(key).copied().unwrap_or(default)
}

enum CurveModel {
    Pseudomode(PseudomodeModel),
    Pt0(SpectralDensity),
    Cor2(SpectralDensity, f64),
}

impl CurveModel {
    fn build(cfg: &RunConfig, density: Option<SpectralDensity>) -> CliResult<Self> {
        let q = fixed(cfg, "q", 1.0);
        let lambda = fixed(cfg, "lambda", 0.0);
        let sd = || -> CliResult<SpectralDensity> {
            if let Some(sd) = density.clone() {
                return Ok(sd);
            }
            let m = fixed(cfg, "m", 1.0);
            if !(m >= 1.0 && m.fract() == 0.0 && m <= u32::MAX as f64) {
                return Err(CliError::usage("m must be a positive integer"));
            }
            SpectralDensity::lorentzian(fixed(cfg, "alpha", f64::NAN), q, fixed(cfg, "k0", 0.0), m as u32)
                .map_err(classify)
        };
        Ok(match cfg.branch {
            SweepBranch::Pseudomode => {
                let c = fixed(cfg, "c_conv", CONVENTION_PRINTED);
                let params = match cfg.fixed.get(AxisName::Coupling.as_str()) {
                    Some(&ratio) => PseudomodeParams::from_coupling_ratio(ratio, q, lambda, c),
                    None => PseudomodeParams::with_convention(fixed(cfg, "alpha", f64::NAN), q, lambda, c),
                }
                .map_err(classify)?;
                CurveModel::Pseudomode(PseudomodeModel::new(params).map_err(classify)?)
            }
            SweepBranch::Pt0 => CurveModel::Pt0(sd()?),
            SweepBranch::Cor2 => {
                if !(lambda >= 0.0 && lambda.is_finite()) {
                    return Err(CliError::usage("lambda must be finite and nonnegative"));
                }
                CurveModel::Cor2(sd()?, lambda)
            }
        })
    }

    fn value(&self, t: f64, tol: f64) -> weakdecay_core::Result<f64> {
        match self {
            CurveModel::Pseudomode(m) => m.conditional_avg(t),
            CurveModel::Pt0(sd) => conditional_pt0(sd, t, tol),
            CurveModel::Cor2(sd, lambda) => conditional_cor2(sd, *lambda, t, tol),
        }
    }

    fn branch(&self) -> Branch {
        match self {
            CurveModel::Pseudomode(_) => Branch::PseudomodeExact,
            CurveModel::Pt0(_) => Branch::PerturbativePt0,
            CurveModel::Cor2(..) => Branch::PerturbativeCor2,
        }
    }

    fn parameters(&self, cfg: &RunConfig) -> BTreeMap<String, f64> {
        let mut p = BTreeMap::new();
        match self {
            CurveModel::Pseudomode(m) => {
                let params = m.params();
                p.insert("alpha".into(), params.alpha);
                p.insert("q".into(), params.q);
                p.insert("lambda".into(), params.lambda);
                p.insert("c_conv".into(), params.c_conv);
                p.insert("coupling".into(), params.coupling_ratio());
                p.insert("r".into(), m.r());
            }
            CurveModel::Pt0(sd) | CurveModel::Cor2(sd, _) => {
                if let SpectralDensity::Lorentzian(l) = sd {
                    p.insert("alpha".into(), l.alpha);
                    p.insert("q".into(), l.q);
                    p.insert("k0".into(), l.k0);
                    p.insert("m".into(), l.m as f64);
                }
                if let CurveModel::Cor2(_, lambda) = self {
                    p.insert("lambda".into(), *lambda);
                }
                if cfg.density_csv.is_some() {
                    p.insert("tabulated".into(), 1.0);
                }
            }
        }
        p
    }
}

fn resolve(base: Option<&Path>, file: &str) -> std::path::PathBuf {
    match base {
        Some(dir) if Path::new(file).is_relative() => dir.join(file),
        _ => file.into(),
    }
}

/// Evaluates a single-t-axis request. Relative `density_csv` paths are
/// resolved against `base` when given.
pub fn curve(cfg: &RunConfig, opts: &RunOptions, base: Option<&Path>) -> CliResult<CorrelationCurve> {
    let axis = cfg.validate_curve()?;
    let pool = opts.pool()?;
    let density = match &cfg.density_csv {
        Some(file) => {
            let path = resolve(base, file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::usage(format!("cannot read density {}: {e}", path.display())))?;
            Some(format::read_density(&text)?)
        }
        None => None,
    };
    let model = CurveModel::build(cfg, density)?;
    let times = axis.values();
    let values: Vec<weakdecay_core::Result<f64>> =
        pool.install(|| times.par_iter().map(|&t| model.value(t, opts.tol)).collect());
    let values = values
        .into_iter()
        .zip(&times)
        .map(|(v, t)| v.map_err(|e| CliError::Numeric(format!("t = {}: {e}", format::fmt_float(*t)))))
        .collect::<CliResult<Vec<f64>>>()?;
    CorrelationCurve::new(times, values, model.branch(), model.parameters(cfg)).map_err(CliError::usage)
}

pub fn curve_bytes(cfg: &RunConfig, opts: &RunOptions, base: Option<&Path>) -> CliResult<Vec<u8>> {
    let c = curve(cfg, opts, base)?;
    let meta = format::curve_metadata(
        &c,
        json!({"command": "curve", "config": cfg, "tol": opts.tol}),
    );
    format::write_curve(&c, &meta)
}

/// Result of a scan: the CSV and a line for every failed point.
#[derive(Debug, Clone)]
pub struct ScanOutput {
    pub records: Vec<ViolationRecord>,
    pub bytes: Vec<u8>,
    pub failures: Vec<String>,
}

pub fn scan(cfg: &RunConfig, opts: &RunOptions) -> CliResult<ScanOutput> {
    cfg.validate_scan()?;
    let pool = opts.pool()?;
    let spec = cfg.sweep();
    let points = spec.points();
    let records: Vec<ViolationRecord> =
        pool.install(|| points.par_iter().map(|p| evaluate_point(spec.branch, p, opts.tol)).collect());
    let (axis, value) = match spec.branch {
        SweepBranch::Pseudomode => ("coupling = 4 c_conv alpha / q^2", "conditional average"),
        _ => ("q", "(conditional average - 1) / alpha"),
    };
    let meta = json!({
        "command": "scan",
        "config": cfg,
        "tol": opts.tol,
        "columns": {"q_or_alpha_axis": axis, "margin": value},
        "points": records.len(),
    });
    let bytes = format::write_scan(&records, &meta)?;
    let failures = records
        .iter()
        .enumerate()
        .filter_map(|(i, r)| {
            r.error.as_ref().map(|e| {
                let params = serde_json::to_string(&r.parameters).unwrap_or_default();
                format!("point {i} {params}: {e}")
            })
        })
        .collect();
    Ok(ScanOutput {
        records,
        bytes,
        failures,
    })
}

/// Extracted table plus the notes written into its header.
#[derive(Debug, Clone)]
pub struct ExtractOutput {
    pub bytes: Vec<u8>,
    pub notes: Vec<String>,
}

/// Puts `curve` on a uniform grid with the same end points and length.
pub fn resample_uniform(curve: &CorrelationCurve) -> CliResult<CorrelationCurve> {
    let n = curve.len();
    if n < 2 {
        return Err(CliError::usage("curve needs at least two samples"));
    }
    let (a, b) = (curve.times[0], curve.times[n - 1]);
    let times: Vec<f64> = (0..n)
        .map(|j| if j == n - 1 { b } else { a + (b - a) * j as f64 / (n - 1) as f64 })
        .collect();
    let values = times.iter().map(|&t| curve.value_at(t)).collect::<weakdecay_core::Result<Vec<_>>>().map_err(classify)?;
    CorrelationCurve::new(times, values, curve.branch, curve.parameters.clone()).map_err(CliError::usage)
}

pub fn extract_text(text: &str, cfg: &ExtractConfig) -> CliResult<ExtractOutput> {
    let ks = cfg.momenta()?;
    let parsed = format::read_curve(text)?;
    let mut notes = Vec::new();
    let curve = if parsed.curve.len() >= 2 && parsed.curve.uniform_step(1e-9).is_none() {
        notes.push(format!(
            "warning: non-uniform t grid resampled to {} uniform samples by linear interpolation",
            parsed.curve.len()
        ));
        resample_uniform(&parsed.curve)?
    } else {
        parsed.curve
    };
    let rows = extract_potential_many(&curve, &ks).map_err(classify)?;
    let (truncated_at, saturated) = rows.first().map_or((f64::NAN, false), |e| (e.truncated_at, e.saturated));
    if !saturated {
        notes.push("warning: curve did not saturate; the finite record biases the result".into());
    }
    let meta = json!({
        "command": "extract",
        "config": cfg,
        "source": parsed.metadata.unwrap_or(Value::Null),
        "truncated_at": truncated_at,
        "saturated": saturated,
    });
    Ok(ExtractOutput {
        bytes: format::write_extraction(&rows, &meta, &notes)?,
        notes,
    })
}

pub fn extract(cfg: &ExtractConfig) -> CliResult<ExtractOutput> {
    let input = cfg.input.as_ref().ok_or_else(|| CliError::usage("extract needs an input curve"))?;
    let text = std::fs::read_to_string(input).map_err(|e| CliError::usage(format!("cannot read {input}: {e}")))?;
    extract_text(&text, cfg)
}
