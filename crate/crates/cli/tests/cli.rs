use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("trotterbench-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trotterbench")).args(args).output().unwrap()
}

fn run_config(command: &str, config: &str, dir: &Path) -> Output {
    let path = dir.join("config.json");
    fs::write(&path, config).unwrap();
    let out = dir.join("out");
    run(&[command, "--config", path.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

#[test]
fn check_sqrt_profile_passes() {
    let dir = scratch("check-ok");
    let out = run_config(
        "check",
        r#"{"family": {"kind": "scalar", "profile": {"kind": "power", "c": 1, "beta": 0.5}}, "alpha": 0}"#,
        &dir,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&dir);
    assert_eq!(r["conditions"]["beta_gt_alpha"], true);
    assert_eq!(r["conditions"]["beta_gt_2alpha_minus_1"], true);
}

#[test]
fn check_flags_weak_regularity() {
    let dir = scratch("check-fail");
    let out = run_config(
        "check",
        r#"{"family": {"kind": "scalar", "profile": {"kind": "power", "c": 1, "beta": 0.5}}, "alpha": 0.9}"#,
        &dir,
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&dir)["conditions"]["beta_gt_2alpha_minus_1"], false);
}

#[test]
fn check_zero_family() {
    let dir = scratch("check-zero");
    let out = run_config("check", r#"{"family": {"kind": "zero"}}"#, &dir);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&dir);
    assert_eq!(r["assumptions"]["c_alpha_hat"], 0.0);
    assert_eq!(r["assumptions"]["holder_l_hat"], 0.0);
}

#[test]
fn converge_zero_family_is_degenerate_pass() {
    let dir = scratch("converge-zero");
    let out = run_config("converge", r#"{"family": {"kind": "zero"}, "n_list": [2, 4, 8, 16]}"#, &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(report(&dir)["left"]["degenerate"].is_string());
}

#[test]
fn converge_slope_failure_exits_3() {
    let dir = scratch("converge-fail");
    let out = run_config(
        "converge",
        r#"{"family": {"kind": "scalar", "profile": {"kind": "linear", "c": 1}},
            "n_list": [2, 4, 8, 16], "command_options": {"slope_tolerance": -0.5}}"#,
        &dir,
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn converge_needs_four_points() {
    let dir = scratch("converge-short");
    let out = run_config("converge", r#"{"family": {"kind": "zero"}, "n_list": [2, 4, 8]}"#, &dir);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn semigroup_linear_example() {
    let dir = scratch("semigroup");
    let out = run(&["semigroup", "--config", fixture("linear_semigroup.json").to_str().unwrap(), "--out", dir.to_str().unwrap(), "--stdout"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r["max_gap"].as_f64().unwrap() <= 1e-10);
    let csv = fs::read_to_string(dir.join("table.csv")).unwrap();
    assert!(csv.starts_with("n,variant,semigroup_error,propagator_error,gap,pairs\n2,left,"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn semigroup_indivisible_grid_exits_65() {
    let dir = scratch("semigroup-grid");
    let out = run_config(
        "semigroup",
        r#"{"family": {"kind": "zero"}, "command_options": {"n_slots": 8, "semigroup_n": [3]}}"#,
        &dir,
    );
    assert_eq!(out.status.code(), Some(65));
}

#[test]
fn bounds_default_scan() {
    let dir = scratch("bounds");
    let out = run(&["bounds", "--config", fixture("bounds.json").to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.join("table.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,alpha,gamma,lhs,rhs,holds"));
    assert_eq!(lines.next(), Some("2,0,0,1,2,true"));
    assert!(!csv.contains('\r'));
    let r: Value = serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert!((r["z_constant"].as_f64().unwrap() - 5.2).abs() < 1e-12);
    assert_eq!(r["scan"]["violations"], 0);
}

#[test]
fn csv_round_trips() {
    let dir = scratch("roundtrip");
    let out = run(&["converge", "--config", fixture("scalar_linear_converge.json").to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.join("table.csv")).unwrap();
    let r: Value = serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    let entries = r["entries"].as_array().unwrap();
    for (line, entry) in csv.lines().skip(1).zip(entries) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[1].parse::<f64>().unwrap(), entry["sup_error_left"].as_f64().unwrap());
        assert_eq!(cells[2].parse::<f64>().unwrap(), entry["sup_error_right"].as_f64().unwrap());
    }
}

#[test]
fn identical_configs_give_identical_outputs() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    for dir in [&a, &b] {
        let out = run(&["converge", "--config", fixture("scalar_weierstrass_converge.json").to_str().unwrap(), "--out", dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    for file in ["report.json", "table.csv"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = scratch("unknown");
    let out = run_config("check", r#"{"family": {"kind": "zero"}, "colour": 1}"#, &dir);
    assert_eq!(out.status.code(), Some(64));
    let out = run_config("check", r#"{"family": {"kind": "zero"}, "command_options": {"gama": 1}}"#, &dir);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn invalid_configs_exit_64() {
    let dir = scratch("invalid");
    for config in [
        "not json",
        r#"{"family": {"kind": "zero"}, "tol": 1e-3}"#,
        r#"{"family": {"kind": "zero"}, "n_list": [4, 2, 8, 16]}"#,
        r#"{"family": {"kind": "zero"}, "alpha": 1.0}"#,
    ] {
        assert_eq!(run_config("check", config, &dir).status.code(), Some(64), "{config}");
    }
    assert_eq!(run(&["check"]).status.code(), Some(64));
    assert_eq!(run(&["frobnicate", "--config", "x"]).status.code(), Some(64));
}

#[test]
fn stdout_is_quiet_without_flag() {
    let dir = scratch("quiet");
    let out = run_config("check", r#"{"family": {"kind": "zero"}}"#, &dir);
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn fixtures_parse() {
    for entry in fs::read_dir(fixture("")).unwrap() {
        let path = entry.unwrap().path();
        trotterbench::config::ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn unreadable_config_is_a_config_error() {
    let out = run(&["check", "--config", "/nonexistent/trotterbench.json"]);
    assert_eq!(out.status.code(), Some(64));
}
