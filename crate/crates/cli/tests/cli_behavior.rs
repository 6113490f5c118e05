//! End-to-end command behavior: exit codes, report schema, config-file
//! precedence, and the fault-injection negative control.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_heavytail")
}

fn scratch(name: &str) -> PathBuf {
    let dir =
        std::env::temp_dir().join(format!("heavytail-cli-test-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gcurve_emits_documented_schema() {
    let dir = scratch("gcurve");
    let out = dir.join("curve");
    let status = Command::new(bin())
        .args([
            "gcurve",
            "--alphas",
            "1.1:1.9:9",
            "--ds",
            "1,10",
            "--seed",
            "7",
        ])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "alpha,d,g,g_normalized,ln_g");
    assert_eq!(csv.lines().count(), 1 + 9 * 2);

    let json = read_json(&out.with_extension("json"));
    assert_eq!(json["schema_version"], "1.0");
    assert_eq!(json["command"], "gcurve");
    assert_eq!(json["seed"], 7);
    assert!(json["config_echo"]["resolved"].is_object());
    assert!(json["results"]["rows"].is_array());

    // normalized column peaks at exactly 1 per dimension
    for d in ["1", "10"] {
        let max = csv
            .lines()
            .skip(1)
            .filter(|l| l.split(',').nth(1) == Some(d))
            .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(max, 1.0);
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn gcurve_rejects_grid_touching_endpoints_with_code_3() {
    let dir = scratch("gcurve-domain");
    let status = Command::new(bin())
        .args(["gcurve", "--alphas", "1.001:1.9:5"])
        .arg("--out")
        .arg(dir.join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bounds_rejects_alpha_two_with_code_3_and_names_alpha() {
    let dir = scratch("bounds-domain");
    let output = Command::new(bin())
        .args(["bounds", "--alpha", "2.0"])
        .arg("--out")
        .arg(dir.join("x"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("alpha"),
        "diagnostic must name the offending parameter: {stderr}"
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn malformed_config_file_exits_2() {
    let dir = scratch("badconfig");
    let cfg = dir.join("bad.conf");
    std::fs::write(&cfg, "not a key value pair\n").unwrap();
    let status = Command::new(bin())
        .args(["validate"])
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_model_exits_2() {
    let dir = scratch("badmodel");
    let status = Command::new(bin())
        .args(["stability-sweep", "--model", "perceptron"])
        .arg("--out")
        .arg(dir.join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn validate_passes_and_fault_injection_fails_with_code_4() {
    let dir = scratch("validate");
    let out = dir.join("ok");
    let status = Command::new(bin())
        .args(["validate", "--seed", "11"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let json = read_json(&out.with_extension("json"));
    assert_eq!(json["results"]["passed"], true);

    // negative control: a corrupted gamma constant must flip the check
    // and the exit code
    let bad = dir.join("bad");
    let output = Command::new(bin())
        .args(["validate", "--seed", "11"])
        .arg("--out")
        .arg(&bad)
        .env("HEAVYTAIL_VALIDATE_FAULT", "gamma")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
    let json = read_json(&bad.with_extension("json"));
    assert_eq!(json["results"]["passed"], false);
    let checks = json["results"]["checks"].as_array().unwrap();
    let gamma_check = checks.iter().find(|c| c["check"] == "gamma_half").unwrap();
    assert_eq!(gamma_check["pass"], false);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_divergence_exits_5() {
    let dir = scratch("divergence");
    // steep quadratic with a large step: |1 - eta * 2 mean(x^2)| > 1, the
    // deterministic part of the recursion explodes
    let status = Command::new(bin())
        .args([
            "stability-sweep",
            "--model",
            "quadratic-1d",
            "--ns",
            "8",
            "--replicas",
            "2",
            "--eta",
            "0.9",
            "--steps",
            "2000",
            "--burn-in",
            "100",
            "--perturbation",
            "0.1",
        ])
        .arg("--config")
        .arg(config_with(&dir, "x_min = 2.75\nx_max = 3.0\n"))
        .arg("--out")
        .arg(dir.join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(5));
    std::fs::remove_dir_all(&dir).ok();
}

fn config_with(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("cfg.conf");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn config_file_feeds_params_and_flags_win() {
    let dir = scratch("precedence");
    let cfg = config_with(&dir, "alphas = 1.3:1.7:3\nds = 2\nseed = 99\n");
    let out = dir.join("curve");
    let status = Command::new(bin())
        .args(["gcurve", "--ds", "5"]) // flag overrides config's ds
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let json = read_json(&out.with_extension("json"));
    // config-supplied seed and grid, flag-supplied dimension
    assert_eq!(json["seed"], 99);
    assert_eq!(json["config_echo"]["resolved"]["ds"], "5");
    assert_eq!(json["config_echo"]["resolved"]["alphas"], "1.3:1.7:3");
    assert!(json["config_echo"]["file"]
        .as_str()
        .unwrap()
        .contains("ds = 2"));
    let rows = json["results"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["d"] == 5));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_report_carries_provenance_block() {
    let dir = scratch("provenance");
    let out = dir.join("sweep");
    let status = Command::new(bin())
        .args([
            "stability-sweep",
            "--ns",
            "16",
            "--replicas",
            "8",
            "--steps",
            "400",
            "--burn-in",
            "200",
            "--seed",
            "3",
        ])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let json = read_json(&out.with_extension("json"));
    let prov = &json["constants_provenance"]["alpha=1.8"];
    assert!(prov["computed"]["C0"].is_number());
    for key in ["C1", "lambda", "C", "Q"] {
        assert!(
            prov["external_unspecified"][key]["value"].is_number(),
            "missing external-unspecified entry {key}"
        );
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn moment_divergence_flags_only_above_alpha() {
    let dir = scratch("moments");
    let out = dir.join("m");
    // tiny counts: this exercises flag logic, not the statistics
    let status = Command::new(bin())
        .args([
            "moment-divergence",
            "--alpha",
            "1.5",
            "--ps",
            "0.5,2.5",
            "--counts",
            "200,2000",
            "--burn-in",
            "500",
            "--stride",
            "10",
            "--seed",
            "5",
        ])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let json = read_json(&out.with_extension("json"));
    let rows = json["results"]["rows"].as_array().unwrap();
    // p = 0.5 < alpha can never be flagged divergent, whatever the ratio
    let low = rows.iter().find(|r| r["p"] == 0.5).unwrap();
    assert_eq!(low["divergent"], false);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn sweep_w1_never_exceeds_coupled_distance() {
    // the synchronous coupling is itself a feasible transport plan, so the
    // exact assignment W1 between the replica clouds is bounded by the mean
    // coupled distance up to Monte-Carlo error on every row
    let dir = scratch("w1-feasibility");
    let out = dir.join("sweep");
    let status = Command::new(bin())
        .args([
            "stability-sweep",
            "--ns",
            "32,64,128",
            "--replicas",
            "64",
            "--steps",
            "2000",
            "--burn-in",
            "1000",
            "--seed",
            "17",
        ])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let json = read_json(&out.with_extension("json"));
    for row in json["results"]["rows"].as_array().unwrap() {
        let coupled = row["mean_coupled_distance"].as_f64().unwrap();
        let w1 = row["w1_empirical"].as_f64().unwrap();
        // 2 standard errors of the 64-replica mean, estimated generously
        // as half the mean itself
        let slack = 0.25 * coupled + 1e-12;
        assert!(
            w1 <= coupled + slack,
            "row {row}: w1 {w1} exceeds coupled {coupled} beyond slack"
        );
    }
    std::fs::remove_dir_all(&dir).ok();
}
