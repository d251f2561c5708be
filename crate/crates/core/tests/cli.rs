use std::path::Path;
use std::process::{Command, Output};

use qng_core::io::{self, ReportRecord};
use qng_core::witness::{delta_w_at, in_gaussian_region};
use qng_core::ProbabilityPair;
use serde::Deserialize;

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data");

fn qng(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qng")).args(args).output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Reads reports back with full floating-point values.
#[derive(Deserialize)]
struct Report {
    label: String,
    p0: f64,
    p1: f64,
    a_opt: f64,
    delta_w: f64,
    sigma_delta_w: f64,
    non_gaussian: bool,
}

fn analyze_json(file: &Path) -> Vec<Report> {
    let out = qng(&["analyze", path_str(file), "--json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn analyze_worked_rates_json() {
    let reports = analyze_json(&Path::new(DATA).join("worked_rates.csv"));
    assert_eq!(reports.len(), 1);
    let r = &reports[0];
    assert_eq!(r.label, "P50_w10_rates");
    assert!((r.p0 - 0.8589).abs() < 1e-4 && (r.p1 - 0.1410).abs() < 1e-4);
    assert!(r.non_gaussian);
}

#[test]
fn reports_are_self_consistent() {
    for file in ["table1.csv", "table2.csv", "worked_rates.csv"] {
        for r in analyze_json(&Path::new(DATA).join(file)) {
            let pair = ProbabilityPair::new(r.p0, r.p1).unwrap();
            let recomputed = delta_w_at(&pair, r.a_opt).unwrap();
            assert!(
                (recomputed - r.delta_w).abs() < 1e-9,
                "{}: {recomputed} vs {}",
                r.label,
                r.delta_w
            );
        }
    }
}

#[test]
fn analyze_csv_output_matches_library() {
    let file = Path::new(DATA).join("table2.csv");
    let out = qng(&["analyze", path_str(&file), "--csv", "--sigma-k", "2"]);
    assert!(out.status.success());
    let inputs = io::parse_input(&std::fs::read_to_string(&file).unwrap()).unwrap();
    let opts = io::AnalyzeOptions {
        sigma_k: 2.0,
        ..Default::default()
    };
    let reports: Vec<ReportRecord> = io::analyze(&inputs, &opts).unwrap();
    let mut expected = Vec::new();
    io::write_reports_csv(&mut expected, &reports).unwrap();
    assert_eq!(out.stdout, expected);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(qng(&["analyze", path_str(&missing)]).status.code(), Some(2));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "label,R0,R1A,R1B,R2,duration_s,inclusive\nx,10,5,5,5,,false\n").unwrap();
    let out = qng(&["analyze", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));

    let boundary = dir.path().join("b.csv");
    let args = [
        "boundary",
        "--r-min",
        "0",
        "--r-max",
        "0",
        "--samples",
        "1",
        "--out",
        path_str(&boundary),
    ];
    assert_eq!(qng(&args).status.code(), Some(1));

    let unwritable = dir.path().join("no/such/dir/b.csv");
    let args = [
        "boundary",
        "--r-max",
        "1",
        "--samples",
        "10",
        "--out",
        path_str(&unwritable),
    ];
    assert_eq!(qng(&args).status.code(), Some(2));

    assert_eq!(qng(&["analyze", "x.csv", "--sigma-k", "many"]).status.code(), Some(1));
    assert_eq!(qng(&["--help"]).status.code(), Some(0));
}

#[test]
fn boundary_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let args = [
        "boundary",
        "--r-min",
        "0",
        "--r-max",
        "1.5",
        "--samples",
        "151",
        "--out",
        path_str(&out),
    ];
    assert!(qng(&args).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 152);
    assert_eq!(lines[1], "0,1,0,1");
}

#[test]
fn simulate_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = Path::new(DATA).join("noise_sweep.json");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for out in [&a, &b] {
        assert!(
            qng(&["simulate", "--config", path_str(&config), "--out", path_str(out)])
                .status
                .success()
        );
    }
    let seed_args = [
        "simulate",
        "--config",
        path_str(&config),
        "--out",
        path_str(&c),
        "--seed",
        "77",
    ];
    assert!(qng(&seed_args).status.success());
    let read = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&io::simulate::truth_path(&a)), read(&io::simulate::truth_path(&b)));
    assert_ne!(read(&a), read(&c));

    let r1 = qng(&["analyze", path_str(&a), "--csv"]);
    let r2 = qng(&["analyze", path_str(&b), "--csv"]);
    assert_eq!(r1.stdout, r2.stdout);
}

#[derive(Deserialize)]
struct Truth {
    p0: f64,
    p1: f64,
    delta_w: f64,
    in_gaussian_region: bool,
}

#[test]
fn simulated_verdicts_match_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let config = Path::new(DATA).join("noise_sweep.json");
    let mut compared = 0;
    for seed in ["1", "100", "200"] {
        let out = dir.path().join(format!("sweep{seed}.csv"));
        let args = [
            "simulate",
            "--config",
            path_str(&config),
            "--out",
            path_str(&out),
            "--seed",
            seed,
        ];
        assert!(qng(&args).status.success());
        let truth: Vec<Truth> =
            serde_json::from_slice(&std::fs::read(io::simulate::truth_path(&out)).unwrap()).unwrap();
        let reports = analyze_json(&out);
        assert_eq!(truth.len(), reports.len());
        for (t, r) in truth.iter().zip(&reports) {
            let pair = ProbabilityPair::new(t.p0, t.p1).unwrap();
            assert_eq!(t.in_gaussian_region, in_gaussian_region(&pair).unwrap());
            assert_eq!(t.in_gaussian_region, t.delta_w <= 0.0);
            if r.delta_w.abs() > 4.0 * r.sigma_delta_w {
                assert_eq!(r.non_gaussian, !t.in_gaussian_region, "{}", r.label);
                compared += 1;
            }
        }
    }
    assert!(compared >= 6);
}

#[test]
fn zero_gain_source_is_vacuum() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("dark.json");
    std::fs::write(
        &config,
        r#"{"pair_gain": 0.0, "trigger_efficiency": 0.5, "signal_efficiency": 0.15, "splitter_t": 0.52,
            "noise_signal_mean": 0.0, "noise_trigger_click_prob": 0.01, "trials": 100000, "seed": 3}"#,
    )
    .unwrap();
    let out = dir.path().join("dark.csv");
    assert!(
        qng(&["simulate", "--config", path_str(&config), "--out", path_str(&out)])
            .status
            .success()
    );
    let r = &analyze_json(&out)[0];
    assert_eq!(r.p0, 1.0);
    assert!(!r.non_gaussian);
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(
        &config,
        r#"{"runs": [{"pair_gain": 1.2, "trigger_efficiency": 0.5, "signal_efficiency": 0.15,
        "splitter_t": 0.52, "noise_signal_mean": 0.0, "noise_trigger_click_prob": 0.0, "trials": 10, "seed": 3}]}"#,
    )
    .unwrap();
    let out = qng(&[
        "simulate",
        "--config",
        path_str(&config),
        "--out",
        path_str(&dir.path().join("x.csv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("runs[0].pair_gain"));
}

#[test]
fn tables_subcommand_reports_each_check() {
    let out = qng(&["tables"]);
    let text = String::from_utf8_lossy(&out.stdout);
    let fails = text.lines().filter(|l| l.starts_with("FAIL")).count();
    let passes = text.lines().filter(|l| l.starts_with("PASS")).count();
    assert_eq!(passes + fails, 16);
    assert!(text.contains(&format!("{passes} of 16 checks passed")));
    assert_eq!(out.status.code(), Some(if fails == 0 { 0 } else { 1 }));
}
