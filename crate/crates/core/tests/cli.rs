use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

use rdps::regress::RegressorSpec;
use rdps::sim::{emit_bounds_csv, read_records};
use rdps::split::{split_system, ResidualTransform, SplitConfig};
use rdps::{Dataset, SplitIndex};

fn rdps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdps")).args(args).env("RDPS_THREADS", "2").output().unwrap()
}

fn write_csv(path: &Path) {
    let mut s = String::from("x,y\n");
    for i in 0..30 {
        let x = -1.5 + 0.1 * i as f64;
        s.push_str(&format!("{x},{}\n", 2.0 * x + 0.3 * ((i * 7) % 5) as f64));
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(rdps(&["--help"]).status.code(), Some(0));
    assert_eq!(rdps(&["--version"]).status.code(), Some(0));
    let help = String::from_utf8(rdps(&["simulate", "--help"]).stdout).unwrap();
    assert!(help.contains("replications") && help.contains("1000") && help.contains("seed"));
    let help = String::from_utf8(rdps(&["reproduce", "--help"]).stdout).unwrap();
    assert!(help.contains("[default: 42]") && help.contains("[default: 512]"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(rdps(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(rdps(&["reproduce", "--replications", "many"]).status.code(), Some(1));
    assert_eq!(rdps(&["simulate", "--config", "/nonexistent/cfg.toml"]).status.code(), Some(1));
    let err = String::from_utf8(rdps(&["simulate", "--config", "/nonexistent/cfg.toml"]).stderr).unwrap();
    assert!(err.contains("/nonexistent/cfg.toml"));
}

#[test]
fn simulate_writes_all_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    let out = dir.path().join("out");
    std::fs::write(
        &cfg,
        format!(
            "setting = \"nonlinear\"\nn = 20\nreplications = 4\nmethods = [\"split-cps-ols\", \"lspm\", \"rdps-qsgd\"]\nlevels = [0.5, 0.9]\noutput_dir = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = rdps(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_records(&out.join("records.csv")).unwrap();
    assert_eq!(rows.len(), 3 * 4 * 2);
    assert!(rows.iter().filter(|r| r.method == "split-cps-ols").all(|r| r.thickness == 1.0 / 11.0));
    for f in ["summary.csv", "thickness.csv", "failures.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 3 * 2);
}

#[test]
fn unknown_config_keys_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "setting = \"linear\"\nreplicatoins = 3\n").unwrap();
    assert_eq!(rdps(&["simulate", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn many_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    let out = dir.path().join("out");
    // trimming 95% of 10 points leaves one survivor, so every cell fails
    std::fs::write(
        &cfg,
        format!(
            "setting = \"linear\"\nn = 10\nreplications = 3\nmethods = [\"rdps-ols-deleted\"]\ntrim_fraction = 0.95\noutput_dir = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = rdps(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let failures = std::fs::read_to_string(out.join("failures.csv")).unwrap();
    assert_eq!(failures.lines().count(), 4);
    let rows = read_records(&out.join("records.csv")).unwrap();
    assert!(rows.iter().all(|r| r.covered.is_none() && r.width.is_nan()));
}

#[test]
fn interval_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    write_csv(&data);
    let o = rdps(&["interval", "--data", data.to_str().unwrap(), "--x", "0.2", "--level", "0.8"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let line: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(line[0], 0.8);
    // y = 2x plus noise averaging 0.6
    assert!(line[1] < 1.0 && 1.0 < line[2], "{text}");
    assert_eq!(line[3], 1.0 / 31.0);

    let neg = rdps(&["interval", "--data", data.to_str().unwrap(), "--x", "-0.7", "--method", "rdps-krr-deleted"]);
    assert_eq!(neg.status.code(), Some(0), "{}", String::from_utf8_lossy(&neg.stderr));
}

#[test]
fn interval_reports_bad_csv_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    std::fs::write(&data, "x,y\n1,2\n3,oops\n").unwrap();
    let o = rdps(&["interval", "--data", data.to_str().unwrap(), "--x", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("bad.csv"));
}

#[test]
fn check_monotonicity_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    write_csv(&data);
    let ok = rdps(&["check-monotonicity", "--data", data.to_str().unwrap(), "--x", "0.1"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8(ok.stdout).unwrap().lines().count(), 1);
    // plain residuals with a far-out covariate break monotonicity
    let bad = rdps(&["check-monotonicity", "--data", data.to_str().unwrap(), "--x", "40", "--kind", "plain"]);
    assert_eq!(bad.status.code(), Some(0));
    assert!(String::from_utf8(bad.stdout).unwrap().lines().count() > 1);
}

#[test]
fn bounds_subcommand_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = rdps(&["bounds", "--method", "rdps-ols-deleted", "--n", "30", "--output", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("y,lower,upper\n"));
    assert_eq!(text.lines().count(), 402);
}

#[test]
fn bounds_of_three_atom_split_system_have_four_plateaus() {
    let data = Dataset::univariate(&[0.0, 1.0, 2.0, 3.0, 4.0], &[0.0, 1.0, 2.5, 2.0, 5.0]).unwrap();
    let cfg = SplitConfig::new(SplitIndex::new(2).unwrap(), RegressorSpec::ols(), ResidualTransform::Identity);
    let ps = split_system(&data, &cfg, &[2.0]).unwrap();
    let grid: Vec<f64> = (0..=400).map(|k| -5.0 + 0.025 * k as f64).collect();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bounds.csv");
    emit_bounds_csv(&ps, &grid, &p).unwrap();
    let plateaus: BTreeSet<(String, String)> = std::fs::read_to_string(&p)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].to_string(), f[2].to_string())
        })
        .collect();
    assert_eq!(plateaus.len(), 4, "{plateaus:?}");
}
