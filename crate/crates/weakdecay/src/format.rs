// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV layouts. Every file starts with one `#` line holding a JSON
//! metadata object; further `#` lines are free-form notes.

use std::collections::BTreeMap;
use std::io::Write;

use serde_json::Value;
use weakdecay_core::lg::ViolationRecord;
use weakdecay_core::perturb::Extraction;
use weakdecay_core::spectral::SpectralDensity;
use weakdecay_core::{Branch, CorrelationCurve};

use crate::error::{CliError, CliResult};

pub const CURVE_COLUMNS: [&str; 3] = ["t", "value", "branch"];
pub const SCAN_COLUMNS: [&str; 7] = ["t", "q_or_alpha_axis", "k0", "m", "lambda", "margin", "status"];
pub const EXTRACT_COLUMNS: [&str; 2] = ["k", "value"];

/// 17 significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn header_line(meta: &Value) -> String {
    format!("# {}\n", serde_json::to_string(meta).expect("metadata serializes"))
}

fn write_rows<I, R>(out: &mut Vec<u8>, columns: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Io(std::io::Error::other(e));
    w.write_record(columns).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    out.write_all(&bytes)?;
    Ok(())
}

/// Metadata object with the curve parameters folded in.
pub fn curve_metadata(curve: &CorrelationCurve, extra: Value) -> Value {
    let mut meta = match extra {
        Value::Object(m) => m,
        Value::Null => serde_json::Map::new(),
        other => {
            let mut m = serde_json::Map::new();
            m.insert("config".into(), other);
            m
        }
    };
    meta.insert("branch".into(), Value::from(curve.branch.as_str()));
    meta.insert("parameters".into(), serde_json::to_value(&curve.parameters).expect("map serializes"));
    Value::Object(meta)
}

pub fn write_curve(curve: &CorrelationCurve, meta: &Value) -> CliResult<Vec<u8>> {
    let mut out = header_line(meta).into_bytes();
    let branch = curve.branch.as_str();
    write_rows(
        &mut out,
        &CURVE_COLUMNS,
        curve
            .times
            .iter()
            .zip(&curve.values)
            .map(|(t, v)| [fmt_float(*t), fmt_float(*v), branch.to_string()]),
    )?;
    Ok(out)
}

/// Splits a document into its `#` lines and the CSV body.
fn split_comments(text: &str) -> (Vec<&str>, String) {
    let mut comments = Vec::new();
    let mut body = String::with_capacity(text.len());
    for line in text.lines() {
        match line.trim_start().strip_prefix('#') {
            Some(c) => comments.push(c.trim()),
            None if line.trim().is_empty() => {}
            None => {
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    (comments, body)
}

fn records(body: &str) -> CliResult<Vec<csv::StringRecord>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes())
        .records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::usage)
}

fn parse_f64(field: &str, line: usize) -> CliResult<f64> {
    field
        .parse::<f64>()
        .map_err(|_| CliError::usage(format!("line {line}: cannot parse {field:?} as a number")))
}

/// A curve read back from disk.
#[derive(Debug, Clone)]
pub struct ParsedCurve {
    pub curve: CorrelationCurve,
    pub metadata: Option<Value>,
}

pub fn read_curve(text: &str) -> CliResult<ParsedCurve> {
    let (comments, body) = split_comments(text);
    let metadata = comments.iter().find_map(|c| serde_json::from_str::<Value>(c).ok());
    let mut rows = records(&body)?;
    if rows.first().is_some_and(|r| r.get(0) == Some("t")) {
        rows.remove(0);
    }
    let header_branch = metadata
        .as_ref()
        .and_then(|m| m.get("branch"))
        .and_then(Value::as_str)
        .and_then(Branch::parse);
    let mut branch = header_branch;
    let (mut times, mut values) = (Vec::with_capacity(rows.len()), Vec::with_capacity(rows.len()));
    for (i, r) in rows.iter().enumerate() {
        if r.len() < 2 {
            return Err(CliError::usage(format!("row {}: expected t,value[,branch]", i + 1)));
        }
        times.push(parse_f64(&r[0], i + 1)?);
        values.push(parse_f64(&r[1], i + 1)?);
        if let Some(name) = r.get(2) {
            let b = Branch::parse(name).ok_or_else(|| CliError::usage(format!("row {}: unknown branch {name:?}", i + 1)))?;
            match branch {
                Some(prev) if prev != b => return Err(CliError::usage("curve mixes branches")),
                _ => branch = Some(b),
            }
        }
    }
    let branch = branch.ok_or_else(|| CliError::usage("curve names no branch"))?;
    let parameters: BTreeMap<String, f64> = metadata
        .as_ref()
        .and_then(|m| m.get("parameters"))
        .and_then(|p| serde_json::from_value(p.clone()).ok())
        .unwrap_or_default();
    let curve = CorrelationCurve::new(times, values, branch, parameters).map_err(CliError::usage)?;
    Ok(ParsedCurve { curve, metadata })
}

/// Two-column (k, value) table; a non-numeric first row is a header.
pub fn read_density(text: &str) -> CliResult<SpectralDensity> {
    let (_, body) = split_comments(text);
    let mut rows = records(&body)?;
    if rows.first().is_some_and(|r| r.get(0).is_some_and(|f| f.parse::<f64>().is_err())) {
        rows.remove(0);
    }
    let mut samples = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        if r.len() != 2 {
            return Err(CliError::usage(format!("row {}: expected two columns k,value", i + 1)));
        }
        samples.push((parse_f64(&r[0], i + 1)?, parse_f64(&r[1], i + 1)?));
    }
    SpectralDensity::tabulated(samples).map_err(CliError::usage)
}

pub fn status_field(record: &ViolationRecord) -> String {
    match &record.error {
        None => "ok".to_string(),
        Some(e) => format!("error:{e}"),
    }
}

pub fn write_scan(records: &[ViolationRecord], meta: &Value) -> CliResult<Vec<u8>> {
    let mut out = header_line(meta).into_bytes();
    write_rows(
        &mut out,
        &SCAN_COLUMNS,
        records.iter().map(|r| {
            [
                fmt_float(r.t),
                fmt_float(r.axis_value()),
                fmt_float(r.param("k0")),
                fmt_float(r.param("m")),
                fmt_float(r.param("lambda")),
                fmt_float(r.figure_value),
                status_field(r),
            ]
        }),
    )?;
    Ok(out)
}

pub fn write_extraction(rows: &[Extraction], meta: &Value, notes: &[String]) -> CliResult<Vec<u8>> {
    let mut out = header_line(meta).into_bytes();
    for n in notes {
        out.extend_from_slice(format!("# {n}\n").as_bytes());
    }
    write_rows(&mut out, &EXTRACT_COLUMNS, rows.iter().map(|e| [fmt_float(e.k), fmt_float(e.value)]))?;
    Ok(out)
}
