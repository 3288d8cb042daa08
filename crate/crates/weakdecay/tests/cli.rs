// Copyright 2026 The weakdecay Authors
// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_weakdecay");

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(s) = stdin {
            // the child may exit before reading its input
            let _ = pipe.write_all(s.as_bytes());
        }
    }
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// (t, value) pairs of a curve CSV.
fn curve_rows(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const PT0: &str = r#"{"branch":"pt0","axes":[{"name":"t","start":0,"stop":30,"count":601}],"fixed":{"alpha":0.01,"q":1}}"#;

#[test]
fn curve_reads_stdin_and_emits_header() {
    let o = run(&["curve"], Some(PT0));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: serde_json::Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# ").unwrap()).unwrap();
    assert_eq!(header["command"], "curve");
    assert_eq!(header["parameters"]["alpha"], 0.01);
    assert_eq!(lines.next().unwrap(), "t,value,branch");
    assert_eq!(curve_rows(&text).len(), 601);
}

#[test]
fn pseudomode_curve_starts_at_one_and_violates() {
    let cfg = r#"{"branch":"pseudomode","axes":[{"name":"t","start":0,"stop":10,"count":200}],"fixed":{"coupling":0.5,"q":1}}"#;
    let o = run(&["curve"], Some(cfg));
    assert_eq!(code(&o), 0);
    let rows = curve_rows(&stdout(&o));
    assert!((rows[0].1 - 1.0).abs() < 1e-14);
    assert!(rows[1..].iter().all(|&(_, v)| v - 1.0 > 0.0));
}

#[test]
fn zero_coupling_pt0_curve_is_flat() {
    let cfg = r#"{"branch":"pt0","axes":[{"name":"t","start":0,"stop":5,"count":11}],"fixed":{"alpha":0}}"#;
    let o = run(&["curve"], Some(cfg));
    assert_eq!(code(&o), 0);
    assert!(curve_rows(&stdout(&o)).iter().all(|&(_, v)| v == 1.0));
}

#[test]
fn weak_measurement_limit_matches_pt0() {
    let cor2 = r#"{"branch":"cor2","axes":[{"name":"t","start":0,"stop":20,"count":21}],"fixed":{"alpha":0.3,"q":1,"lambda":1e-8}}"#;
    let pt0 = r#"{"branch":"pt0","axes":[{"name":"t","start":0,"stop":20,"count":21}],"fixed":{"alpha":0.3,"q":1}}"#;
    let a = curve_rows(&stdout(&run(&["curve"], Some(cor2))));
    let b = curve_rows(&stdout(&run(&["curve"], Some(pt0))));
    assert_eq!(a.len(), 21);
    for (x, y) in a.iter().zip(&b) {
        assert!((x.1 - y.1).abs() < 1e-6, "{x:?} vs {y:?}");
    }
}

#[test]
fn curve_and_scan_are_byte_identical_across_runs_and_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let scan = r#"{"branch":"cor2","axes":[{"name":"q","start":0.5,"stop":2,"count":4},{"name":"t","start":0,"stop":10,"count":6}],"fixed":{"alpha":0.2,"lambda":0.1,"k0":0.5,"m":2}}"#;
    let scan_path = write(dir.path(), "scan.json", scan);
    let curve_path = write(dir.path(), "curve.json", PT0);
    for (cmd, path) in [("scan", &scan_path), ("curve", &curve_path)] {
        let outs: Vec<Vec<u8>> = ["1", "3", "1", "8"]
            .iter()
            .map(|j| {
                let o = run(&[cmd, "--config", path, "--jobs", j], None);
                assert_eq!(code(&o), 0);
                o.stdout
            })
            .collect();
        assert!(outs.windows(2).all(|w| w[0] == w[1]), "{cmd} output differs");
    }
}

#[test]
fn output_path_receives_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let cfg = format!(
        r#"{{"branch":"pt0","axes":[{{"name":"t","start":0,"stop":1,"count":3}}],"fixed":{{"alpha":0.1}},"output_path":{}}}"#,
        serde_json::to_string(out.to_str().unwrap()).unwrap()
    );
    let o = run(&["curve"], Some(&cfg));
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(curve_rows(&std::fs::read_to_string(out).unwrap()).len(), 3);
}

#[test]
fn tabulated_density_drives_a_curve() {
    let dir = tempfile::tempdir().unwrap();
    let mut table = String::from("k,value\n");
    for j in -400..=400 {
        let k = j as f64 * 0.05;
        table.push_str(&format!("{k},{}\n", 0.1 / (k * k + 1.0)));
    }
    write(dir.path(), "density.csv", &table);
    let cfg = r#"{"branch":"pt0","axes":[{"name":"t","start":0,"stop":4,"count":5}],"density_csv":"density.csv"}"#;
    let path = write(dir.path(), "tab.json", cfg);
    let o = run(&["curve", "--config", &path], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let lor = r#"{"branch":"pt0","axes":[{"name":"t","start":0,"stop":4,"count":5}],"fixed":{"alpha":0.1}}"#;
    let exact = curve_rows(&stdout(&run(&["curve"], Some(lor))));
    for (a, b) in curve_rows(&stdout(&o)).iter().zip(&exact) {
        // truncation of the table at |k| = 20 costs about 2e-4 of the weight
        assert!((a.1 - b.1).abs() < 1e-4, "{a:?} vs {b:?}");
    }
}

#[test]
fn scan_of_single_points_is_one_row() {
    let cfg = r#"{"branch":"pt0","axes":[{"name":"q","start":1,"stop":1,"count":1},{"name":"t","start":2,"stop":2,"count":1}],"fixed":{"alpha":0.5}}"#;
    let o = run(&["scan"], Some(cfg));
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "t,q_or_alpha_axis,k0,m,lambda,margin,status");
    assert_eq!(body.len(), 2);
    assert!(body[1].ends_with(",ok"));
}

#[test]
fn scan_corner_approaches_saturation_per_alpha() {
    let cfg = r#"{"branch":"cor2","axes":[{"name":"lambda","start":0,"stop":1,"count":3},{"name":"t","start":0,"stop":40,"count":3}],"fixed":{"alpha":0.7,"q":2,"m":1}}"#;
    let o = run(&["scan"], Some(cfg));
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').collect()).collect();
    // λ = 0, t = 40 is the third row
    let corner: f64 = rows[2][5].parse().unwrap();
    assert!((corner - 1.0 / 8.0).abs() < 1e-9, "{corner}");
}

#[test]
fn extract_round_trip_and_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let curve = run(&["curve"], Some(PT0));
    let curve_path = write(dir.path(), "pt0.csv", &stdout(&curve));

    let o = run(&["extract", "--input", &curve_path, "--k-max", "5", "--k-count", "1"], None);
    assert_eq!(code(&o), 0);
    let rows = curve_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].0, 0.0);
    assert!((rows[0].1 - 0.02).abs() < 0.02 * 0.02);

    let cfg = format!(r#"{{"input":{},"k_max":5,"k_count":6}}"#, serde_json::to_string(&curve_path).unwrap());
    let o = run(&["extract"], Some(&cfg));
    assert_eq!(code(&o), 0);
    for (k, v) in curve_rows(&stdout(&o)) {
        let exact = 0.02 / (k * k + 1.0);
        assert!(((v - exact) / exact).abs() < 0.02, "k = {k}: {v} vs {exact}");
    }

    let flat = write(dir.path(), "flat.csv", "t,value,branch\n0,1,pt0\n1,1,pt0\n2,1,pt0\n3,1,pt0\n4,1,pt0\n");
    let o = run(&["extract", "--input", &flat, "--k-max", "2", "--k-count", "3"], None);
    assert_eq!(code(&o), 0);
    assert!(curve_rows(&stdout(&o)).iter().all(|&(_, v)| v == 0.0));
}

#[test]
fn nonuniform_input_is_resampled_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("t,value,branch\n");
    for j in 0..200 {
        let t = 0.1 * j as f64 + if j % 2 == 1 { 0.01 } else { 0.0 };
        text.push_str(&format!("{t},{},pt0\n", 1.0 + 0.01 * (1.0 - (-t).exp())));
    }
    let path = write(dir.path(), "nu.csv", &text);
    let o = run(&["extract", "--input", &path, "--k-max", "1", "--k-count", "2"], None);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.lines().nth(1).unwrap().starts_with("# warning: non-uniform t grid resampled"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("resampled"));
}

#[test]
fn validate_passes_and_negative_control_fails() {
    let o = run(&["validate"], None);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("8 checks, 0 failed"));
    let o = run(&["validate", "--convention-scale", "2"], None);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL convention_consistency"));
}

#[test]
fn numeric_failures_exit_one() {
    let curve = r#"{"branch":"pseudomode","axes":[{"name":"t","start":0,"stop":1,"count":3}],"fixed":{"alpha":0}}"#;
    let o = run(&["curve"], Some(curve));
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("t = "));

    let scan = r#"{"branch":"pseudomode","axes":[{"name":"alpha","start":0,"stop":0.1,"count":2},{"name":"t","start":1,"stop":1,"count":1}]}"#;
    let o = run(&["scan"], Some(scan));
    assert_eq!(code(&o), 1);
    let text = stdout(&o);
    assert!(text.contains(",error:stationary state is degenerate"));
    assert!(text.lines().last().unwrap().ends_with(",ok"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("point 0"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let missing = missing.to_str().unwrap();
    let cases: Vec<(Vec<&str>, Option<&str>)> = vec![
        (vec![], None),
        (vec!["frobnicate"], None),
        (vec!["curve", "--bogus"], Some(PT0)),
        (vec!["curve", "--config", missing], None),
        (vec!["curve"], Some("{not json")),
        (vec!["curve"], Some("")),
        (vec!["curve"], Some(r#"{"branch":"pt0","axes":[],"fixed":{},"extra":1}"#)),
        (vec!["curve"], Some(r#"{"branch":"pt1","axes":[]}"#)),
        (vec!["curve"], Some(r#"{"branch":"pt0","axes":[{"name":"t","start":0,"stop":1,"count":3}]}"#)),
        (vec!["curve"], Some(r#"{"branch":"pt0","axes":[{"name":"t","start":0,"stop":1,"count":0}],"fixed":{"alpha":1}}"#)),
        (vec!["curve"], Some(r#"{"branch":"pt0","axes":[{"name":"t","start":-1,"stop":1,"count":3}],"fixed":{"alpha":1}}"#)),
        (vec!["curve"], Some(r#"{"branch":"pt0","axes":[{"name":"t","start":0,"stop":1,"count":3}],"fixed":{"alpha":-1}}"#)),
        (vec!["curve"], Some(r#"{"branch":"pt0","axes":[{"name":"t","start":0,"stop":1,"count":3}],"fixed":{"alpha":1,"m":1.5}}"#)),
        (vec!["curve"], Some(r#"{"branch":"pt0","axes":[{"name":"t","start":0,"stop":1,"count":3}],"fixed":{"alpha":1,"zeta":1}}"#)),
        (vec!["curve"], Some(r#"{"branch":"pt0","axes":[{"name":"t","start":0,"stop":1,"count":3}],"fixed":{"alpha":1},"density_csv":"nowhere.csv"}"#)),
        (vec!["curve", "--jobs", "0"], Some(PT0)),
        (vec!["curve", "--tol", "-1"], Some(PT0)),
        (vec!["curve", "--tol", "abc"], Some(PT0)),
        (vec!["scan"], Some(PT0)),
        (vec!["scan"], Some(r#"{"branch":"pseudomode","axes":[{"name":"m","start":1,"stop":2,"count":2},{"name":"t","start":0,"stop":1,"count":2}],"fixed":{"alpha":0.1}}"#)),
        (vec!["validate", "--convention-scale", "0"], None),
        (vec!["extract", "--k-max", "1", "--k-count", "2"], Some("{}")),
        (vec!["extract", "--input", missing, "--k-max", "1", "--k-count", "2"], None),
        (vec!["extract", "--input", missing, "--k-count", "2"], None),
    ];
    for (args, stdin) in cases {
        let o = run(&args, stdin);
        assert_eq!(code(&o), 2, "{args:?} {stdin:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn extract_rejects_unparseable_curves() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [("nobranch.csv", "0,1\n1,2\n"), ("bad.csv", "0,1,pt0\n1,x,pt0\n"), ("dec.csv", "1,1,pt0\n0,1,pt0\n")] {
        let p = write(dir.path(), name, text);
        let o = run(&["extract", "--input", &p, "--k-max", "1", "--k-count", "2"], None);
        assert_eq!(code(&o), 2, "{name}");
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"], None)), 0);
    assert_eq!(code(&run(&["--version"], None)), 0);
}
