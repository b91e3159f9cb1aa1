//! Subcommand outputs of the `fbsde` binary.

use std::fs;
use std::process::{Command, Output};

fn fbsde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbsde"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = fbsde(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const SMALL: [&str; 6] = ["--T", "5", "--n", "800", "--seed", "3"];

fn with_small<'a>(head: &[&'a str]) -> Vec<&'a str> {
    head.iter().copied().chain(SMALL).collect()
}

#[test]
fn simulate_writes_the_path() {
    let out = ok(&with_small(&["simulate"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "i,t,x,y");
    assert_eq!(lines.len(), 1 + 801);
}

#[test]
fn estimate_writes_one_row_per_grid_point() {
    let out = ok(&with_small(&[
        "estimate",
        "--bandwidth",
        "0.3",
        "--grid",
        "7",
        "--method",
        "ll",
        "--target",
        "z2",
    ]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "x,estimate,true,local_time,variance,n_effective");
    assert_eq!(lines.len(), 8);
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 6);
    }
}

#[test]
fn estimate_with_cross_validated_bandwidth_echoes_it() {
    let out = fbsde(&with_small(&["estimate", "--bandwidth", "cv", "--grid", "3"]));
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bandwidth="));
}

#[test]
fn ci_writes_both_methods() {
    let out = ok(&with_small(&[
        "ci",
        "--bandwidth",
        "0.3",
        "--grid",
        "4",
        "--ci-method",
        "both",
    ]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "x,point,lo,hi,method,alpha");
    assert_eq!(lines.iter().filter(|l| l.contains(",el,")).count(), 4);
    assert_eq!(lines.iter().filter(|l| l.contains(",normal,")).count(), 4);
}

#[test]
fn mc_table_and_coverage_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    ok(&with_small(&[
        "mc-table",
        "--L",
        "3",
        "--grid",
        "4",
        "--bandwidth",
        "0.3",
        "--out-dir",
        d,
    ]));
    let table = fs::read_to_string(dir.path().join("mae_mse.csv")).unwrap();
    assert!(table.starts_with("target,method,T,n,L,mae,mse\n"));
    assert_eq!(table.lines().count(), 1 + 4);
    assert!(dir.path().join("run_meta.json").exists());

    ok(&with_small(&[
        "coverage",
        "--L",
        "3",
        "--grid",
        "4",
        "--bandwidth",
        "0.3",
        "--target",
        "f",
        "--out-dir",
        d,
    ]));
    let cov = fs::read_to_string(dir.path().join("coverage.csv")).unwrap();
    assert!(cov.starts_with("x,ci_method,coverage,mean_width\n"));
    let iv = fs::read_to_string(dir.path().join("intervals.csv")).unwrap();
    assert!(iv.starts_with("x,true,point,lo_normal,hi_normal,lo_el,hi_el\n"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"model": {"name": "example2"}, "T": 5, "n": 800, "m": 9, "bandwidth": 0.05}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = ok(&["estimate", "--config", c]);
    assert_eq!(from_file.lines().count(), 10);
    let overridden = ok(&["estimate", "--config", c, "--grid", "5"]);
    assert_eq!(overridden.lines().count(), 6);
    // the example-2 generator truth is positive everywhere
    let truth: f64 = from_file
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!(truth > 0.0);
}

#[test]
fn bad_input_exits_with_usage_code() {
    for args in [
        vec!["estimate", "--model", "nope"],
        vec!["estimate", "--bandwidth", "-1"],
        vec!["estimate", "--alpha", "1.5"],
        vec!["estimate", "--param", "sigma"],
    ] {
        let out = fbsde(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let missing = fbsde(&["estimate", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(missing.status.code(), Some(2));
}
