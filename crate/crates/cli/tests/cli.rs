use std::path::PathBuf;
use std::process::{Command, Output};

use hardy_cli::{emit_report, run_analyze, AnalysisReport, OutputFormat, RunConfig, CSV_HEADER};
use hardy_core::angular::BoundednessVerdict;
use hardy_core::{Complex64, MapSpec};
use tempfile::TempDir;

fn write_map(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let path = dir.path().join(format!("{name}.json"));
    std::fs::write(&path, json).unwrap();
    path
}

fn hardy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardy")).args(args).output().unwrap()
}

fn analyze(path: &std::path::Path, extra: &[&str]) -> Output {
    let mut args = vec!["analyze", path.to_str().unwrap(), "--truncations", "16,32"];
    args.extend_from_slice(extra);
    hardy(&args)
}

#[test]
fn dilation_analysis() {
    let dir = TempDir::new().unwrap();
    let map = write_map(&dir, "dil", r#"{"type":"affine","a":2.0,"b":[0,0]}"#);
    let out = analyze(&map, &["--p", "1,2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: AnalysisReport = serde_json::from_slice(&out.stdout).unwrap();
    match report.verdict {
        BoundednessVerdict::Bounded {
            lambda,
            norm,
            essential_norm,
            spectral_radius,
        } => {
            assert_eq!(lambda, 0.5);
            assert_eq!(norm, std::f64::consts::FRAC_1_SQRT_2);
            assert_eq!(essential_norm, norm);
            assert_eq!(spectral_radius, norm);
        }
        ref other => panic!("{other:?}"),
    }
    assert_eq!(report.invariants[0].p, 1.0);
    assert_eq!(report.invariants[0].hp_norm, 0.5);
    assert!(report.psd_summary.iter().all(|s| s.psd));
}

#[test]
fn exit_codes_follow_the_verdict() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("const", r#"{"type":"rational","num":[[1,0]],"den":[[1,0]]}"#, 2),
        ("inv", r#"{"type":"rational","num":[[1,0]],"den":[[0,0],[1,0]]}"#, 2),
        ("sqrt", r#"{"type":"blackbox","name":"sqrt"}"#, 2),
        ("shift", r#"{"type":"rational","num":[[-1,0],[1,0]],"den":[[1,0]]}"#, 3),
        ("zinv", r#"{"type":"rational","num":[[1,0],[0,0],[1,0]],"den":[[0,0],[1,0]]}"#, 0),
    ];
    for (name, json, code) in cases {
        let out = analyze(&write_map(&dir, name, json), &[]);
        assert_eq!(out.status.code(), Some(code), "{name}");
    }
}

#[test]
fn usage_errors_exit_64() {
    let dir = TempDir::new().unwrap();
    let bad = write_map(&dir, "bad", r#"{"type":"affine","a":-1.0,"b":[0,0]}"#);
    assert_eq!(analyze(&bad, &[]).status.code(), Some(64));
    let garbled = write_map(&dir, "garbled", "{");
    assert_eq!(analyze(&garbled, &[]).status.code(), Some(64));
    assert_eq!(hardy(&["analyze", "/nonexistent/map.json"]).status.code(), Some(64));
    let ok = write_map(&dir, "ok", r#"{"type":"affine","a":1.0,"b":[1,0]}"#);
    assert_eq!(analyze(&ok, &["--tol", "-1"]).status.code(), Some(64));
    assert_eq!(hardy(&["analyze", ok.to_str().unwrap(), "--truncations", "32,16"]).status.code(), Some(64));
    assert_eq!(hardy(&["frobnicate"]).status.code(), Some(64));
}

#[test]
fn json_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let map = write_map(&dir, "m", r#"{"type":"rational","num":[[1,0],[3,0],[1,0]],"den":[[1,0],[1,0]]}"#);
    let a = analyze(&map, &[]);
    let b = analyze(&map, &[]);
    let single = Command::new(env!("CARGO_BIN_EXE_hardy"))
        .args(["analyze", map.to_str().unwrap(), "--truncations", "16,32"])
        .env("HARDY_NUM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, single.stdout);
}

#[test]
fn timings_are_opt_in() {
    let dir = TempDir::new().unwrap();
    let map = write_map(&dir, "m", r#"{"type":"affine","a":1.0,"b":[1,0]}"#);
    let plain: serde_json::Value = serde_json::from_slice(&analyze(&map, &[]).stdout).unwrap();
    assert!(plain.get("timings").is_none());
    let timed: serde_json::Value = serde_json::from_slice(&analyze(&map, &["--timings"]).stdout).unwrap();
    assert!(timed["timings"].as_array().is_some_and(|t| !t.is_empty()));
}

#[test]
fn csv_summary_rows() {
    let dir = TempDir::new().unwrap();
    let bounded = write_map(&dir, "dil", r#"{"type":"affine","a":2.0,"b":[0,0]}"#);
    let out = String::from_utf8(analyze(&bounded, &["--format", "csv"]).stdout).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], CSV_HEADER.join(","));
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cells.len(), 9);
    assert_eq!(&cells[..4], ["dil", "Bounded", "0.5", "0.7071067811865476"]);
    assert!(cells.iter().all(|c| !c.is_empty()));

    let unbounded = write_map(&dir, "inv", r#"{"type":"rational","num":[[1,0]],"den":[[0,0],[1,0]]}"#);
    let out = String::from_utf8(analyze(&unbounded, &["--format", "csv"]).stdout).unwrap();
    let cells: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(cells, ["inv", "Unbounded", "inf", "", "", "", "", "", ""]);
}

#[test]
fn reports_survive_a_json_round_trip() {
    let cfg = RunConfig {
        truncations: vec![16, 32],
        psd_sets: 3,
        p_values: vec![1.0, 2.0, 4.0],
        ..RunConfig::default()
    };
    let maps = [
        MapSpec::affine(2.0, Complex64::new(0.0, 0.0)).unwrap(),
        MapSpec::rational_real(&[1.0, 0.0, 1.0], &[0.0, 1.0]).unwrap(),
        MapSpec::rational_real(&[1.0], &[0.0, 1.0]).unwrap(),
        MapSpec::rational_real(&[-1.0, 1.0], &[1.0]).unwrap(),
        MapSpec::BlackBox(hardy_core::BlackBox::builtin("sqrt").unwrap()),
        MapSpec::BlackBox(hardy_core::BlackBox::builtin("z_plus_sqrt").unwrap()),
    ];
    for (i, spec) in maps.iter().enumerate() {
        let report = run_analyze(spec, &format!("m{i}"), &cfg).unwrap();
        let text = emit_report(&report, OutputFormat::Json).unwrap();
        let back: AnalysisReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report, "{text}");
    }
}

#[test]
fn certify_subcommand() {
    let dir = TempDir::new().unwrap();
    let good = write_map(&dir, "g", r#"{"type":"mobius","a":[1,0],"b":[1,0],"c":[0,0],"d":[1,0]}"#);
    let out = hardy(&["certify", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"]["kind"], "CertifiedSelfMap");

    let bad = write_map(&dir, "b", r#"{"type":"rational","num":[[-1,0],[1,0]],"den":[[1,0]]}"#);
    let out = hardy(&["certify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"]["kind"], "NotSelfMap");
    assert!(v["verdict"]["witness"][0].as_f64().unwrap() > 0.0);
}

#[test]
fn matrix_subcommand() {
    let dir = TempDir::new().unwrap();
    let id = write_map(&dir, "id", r#"{"type":"affine","a":1.0,"b":[0,0]}"#);
    let out = hardy(&["matrix", id.to_str().unwrap(), "--n", "4", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 4);
        for (j, cell) in row.iter().enumerate() {
            let (re, im) = cell.split_once(',').unwrap();
            let (re, im): (f64, f64) = (re.parse().unwrap(), im.parse().unwrap());
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((re - expected).abs() < 1e-12 && im.abs() < 1e-12);
        }
    }
    let json = hardy(&["matrix", id.to_str().unwrap(), "--n", "4"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["n"], 4);
    assert_eq!(hardy(&["matrix", id.to_str().unwrap(), "--n", "4", "--rho", "1.5"]).status.code(), Some(64));
}

#[test]
fn psd_subcommand() {
    let dir = TempDir::new().unwrap();
    let map = write_map(&dir, "dil", r#"{"type":"affine","a":2.0,"b":[0,0]}"#);
    let out = hardy(&["psd", map.to_str().unwrap(), "--lambda", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 10);
    assert!(reports.iter().all(|r| r["verdict"] == "PSD"));

    let points = dir.path().join("points.json");
    std::fs::write(&points, "[[1.0, 0.0]]").unwrap();
    let out = hardy(&["psd", map.to_str().unwrap(), "--lambda", "0.4", "--points", points.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v[0]["verdict"]["NotPSD"]["witness"].is_array());

    std::fs::write(&points, "[[-1.0, 0.0]]").unwrap();
    let out = hardy(&["psd", map.to_str().unwrap(), "--lambda", "0.4", "--points", points.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
}
