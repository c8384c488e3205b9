//! End-to-end tests of the `aircomp` binary.

use std::path::Path;
use std::process::{Command, Output};

use aircomp::channel::SystemConfig;
use aircomp::coding::EncodingMatrix;
use aircomp::experiments::{MseReport, CSV_HEADER};
use aircomp::numerics::ComplexMatrix;

fn aircomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aircomp")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn construct_writes_orthonormal_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("phi.json");
    let out = aircomp(&["construct", "--l", "5", "--l-tilde", "10", "--seed", "7", "--out", path_str(&file)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("orthonormal: ok"));
    let enc = EncodingMatrix::load(&file).unwrap();
    assert_eq!(enc.phi().shape(), (10, 5));
    assert!(enc.phi().gram().max_abs_diff(&ComplexMatrix::identity(5)) < 1e-10);
}

#[test]
fn construct_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for f in [&a, &b] {
        let out = aircomp(&["construct", "--l", "5", "--l-tilde", "10", "--seed", "7", "--out", path_str(f)]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn construct_rejects_short_codewords() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("phi.json");
    let out = aircomp(&["construct", "--l", "5", "--l-tilde", "4", "--seed", "7", "--out", path_str(&file)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!file.exists());
}

#[test]
fn check_accepts_constructed_and_flags_repetition() {
    let dir = tempfile::tempdir().unwrap();
    let random = dir.path().join("random.json");
    let out = aircomp(&["construct", "--l", "3", "--l-tilde", "6", "--seed", "2", "--out", path_str(&random)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(aircomp(&["check", "--matrix", path_str(&random), "--strict"]).status.code(), Some(0));

    let rep = dir.path().join("rep.json");
    let args = ["construct", "--construction", "repetition", "--l", "2", "--m", "2", "--l-tilde", "4", "--out", path_str(&rep)];
    assert_eq!(aircomp(&args).status.code(), Some(0));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(aircomp(&strict).status.code(), Some(1));

    let lenient = aircomp(&["check", "--matrix", path_str(&rep)]);
    assert_eq!(lenient.status.code(), Some(0));
    assert!(stdout(&lenient).contains("rank: fail"));
    assert_eq!(aircomp(&["check", "--matrix", path_str(&rep), "--strict"]).status.code(), Some(1));
}

#[test]
fn check_rejects_malformed_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    std::fs::write(&file, r#"{"rows":2,"cols":1,"re":[1.0],"im":[0.0]}"#).unwrap();
    assert_eq!(aircomp(&["check", "--matrix", path_str(&file)]).status.code(), Some(2));
    assert_eq!(aircomp(&["check", "--matrix", "/nonexistent/phi.json"]).status.code(), Some(2));
}

#[test]
fn regions_reports_bounds_and_source_length() {
    let out = aircomp(&["regions", "--epsilon", "0.02", "--eta", "1", "--delta", "0.2", "--snr-db", "15"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let bounds: Vec<String> = text
        .lines()
        .skip(1)
        .map(|l| format!("{:.5}", l.rsplit(',').next().unwrap().parse::<f64>().unwrap()))
        .collect();
    assert!(bounds.iter().any(|b| b == "0.63246"));
    assert!(bounds.iter().any(|b| b == "0.31623"));
    let delta_row = text.lines().find(|l| l.contains("epsilon_delta")).unwrap();
    assert_eq!(delta_row.split(',').nth(3), Some("6"));

    let capped = stdout(&aircomp(&["regions", "--epsilon", "1e9", "--eta", "1", "--delta", "0.2", "--snr-db", "15"]));
    for line in capped.lines().skip(1) {
        let bound: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(bound, 1.0);
    }
    let bad = aircomp(&["regions", "--epsilon", "0.02", "--eta", "1", "--delta", "1.5", "--snr-db", "15"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn simulate_writes_artifacts_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, SystemConfig::default().to_json()).unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out_dir = dir.path().join(format!("run{threads}"));
        let out = aircomp(&[
            "simulate",
            "--config",
            path_str(&config),
            "--trials",
            "3000",
            "--mode",
            "fixed-unit",
            "--threads",
            threads,
            "--eta",
            "1",
            "--out",
            path_str(&out_dir),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert!(stdout(&out).contains("ratio "));
        let csv = std::fs::read_to_string(out_dir.join("trials.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3001);
        let report: MseReport = serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
        assert_eq!(report.trials, 3000);
        assert!((report.mean_ratio() - 1.0).abs() < 0.05);
        assert!(report.exceedance_freq.is_some());
        outputs.push((csv, std::fs::read(out_dir.join("report.json")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn simulate_usage_and_assertion_exit_codes() {
    assert_eq!(aircomp(&["simulate", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(aircomp(&["simulate", "--config", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(aircomp(&["simulate", "--mode", "sideways"]).status.code(), Some(2));
    let tight = aircomp(&["simulate", "--trials", "20", "--assert-tolerance", "0"]);
    assert_eq!(tight.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"k_users": 10, "unknown": 1}"#).unwrap();
    assert_eq!(aircomp(&["simulate", "--config", path_str(&config)]).status.code(), Some(2));
}

#[test]
fn simulate_rician_mode_runs() {
    let out = aircomp(&["simulate", "--trials", "500", "--mode", "rician", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!stdout(&out).contains("ks "));
}

#[test]
fn theory_prints_closed_forms() {
    let out = aircomp(&["theory", "--eta", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("gamma_opt 0.0500000000000"));
    assert!(text.contains("chernoff_tail 0.215614303971"));
}

#[test]
fn dist_test_passes_in_default_setting() {
    let out = aircomp(&["dist-test", "--trials", "4000"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("overall: PASS"));
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 6);
}

#[test]
fn figures_write_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = path_str(dir.path());
    assert_eq!(aircomp(&["figures", "--which", "3", "--out-dir", d]).status.code(), Some(0));
    let fig3 = std::fs::read_to_string(dir.path().join("fig3_rate_regions.csv")).unwrap();
    assert_eq!(fig3.lines().next(), Some(CSV_HEADER));
    assert_eq!(fig3.lines().count(), 1 + 11 * 5);

    assert_eq!(aircomp(&["figures", "--which", "4", "--trials", "50", "--out-dir", d]).status.code(), Some(0));
    let fig4 = std::fs::read_to_string(dir.path().join("fig4_blocklength.csv")).unwrap();
    assert_eq!(fig4.lines().count(), 7);

    assert_eq!(aircomp(&["figures", "--which", "2", "--trials", "20", "--out-dir", d]).status.code(), Some(0));
    let fig2 = std::fs::read_to_string(dir.path().join("fig2_mse_vs_snr.csv")).unwrap();
    assert_eq!(fig2.lines().count(), 1 + 7 * 4);

    assert_eq!(aircomp(&["figures", "--which", "9", "--out-dir", d]).status.code(), Some(2));
}
