//! End-to-end checks of the `cellcov` binary: exit codes, table shape,
//! manifest content, overrides, and reproducibility.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cellcov-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

const MINI: &str = r#"
[scenario]
pathloss_exponent = 4.0
target_sinr_db = 0.0
user_density_per_km2 = 1000.0

[[scenario.tiers]]
bs_density_per_km2 = 100.0
tx_power_watts = 1.0

[region]
width_m = 1500.0
height_m = 1500.0

[policy]
kind = "threshold-sweep"
theta_max = 4

[run]
master_seed = 11
trials = 8
"#;

fn cellcov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellcov"))
        .args(args)
        .output()
        .expect("spawn cellcov")
}

#[test]
fn analytic_table_is_sorted_and_complete() {
    let dir = workdir("analytic");
    let cfg = dir.join("mini.toml");
    fs::write(&cfg, MINI).unwrap();
    let out = dir.join("table.csv");
    let res = cellcov(&[
        "analytic",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    // trials present in an analytic run draws a warning.
    assert!(
        String::from_utf8_lossy(&res.stderr).contains("ignored"),
        "stderr: {}",
        String::from_utf8_lossy(&res.stderr)
    );
    let table = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(
        lines[0],
        "theta,analytic_exact,analytic_approx,simulated_mean,simulated_stderr,p_a,p_1,trials"
    );
    assert_eq!(lines.len(), 6, "header + thetas 0..=4");
    let thetas: Vec<u32> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(thetas, vec![0, 1, 2, 3, 4]);
    // Simulated columns are empty in analytic mode.
    assert!(lines[1].contains(",,"));

    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(format!("{}.manifest.json", out.display())).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "analytic");
    assert_eq!(manifest["master_seed"], 11);
    assert_eq!(manifest["sweep_points"], 5);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn schema_error_exits_one_and_names_key() {
    let dir = workdir("schema");
    let cfg = dir.join("bad.toml");
    fs::write(&cfg, MINI.replace("theta_max = 4", "")).unwrap();
    let res = cellcov(&["analytic", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("theta_max"), "stderr: {stderr}");

    // Unknown keys are schema errors too.
    fs::write(&cfg, MINI.replace("[run]", "[run]\nwallclock = 1")).unwrap();
    let res = cellcov(&["analytic", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("wallclock"), "stderr: {stderr}");

    // Missing file.
    let res = cellcov(&["analytic", "--config", "/nonexistent/x.toml"]);
    assert_eq!(res.status.code(), Some(1));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn simulation_abort_exits_two() {
    // A region so small that most trials draw zero BSs trips the 10%
    // discard limit.
    let dir = workdir("abort");
    let cfg = dir.join("tiny.toml");
    fs::write(
        &cfg,
        MINI.replace("width_m = 1500.0", "width_m = 40.0")
            .replace("height_m = 1500.0", "height_m = 40.0"),
    )
    .unwrap();
    let res = cellcov(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("discarded"), "stderr: {stderr}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn simulate_reproducible_across_threads_and_runs() {
    let dir = workdir("determinism");
    let cfg = dir.join("mini.toml");
    fs::write(&cfg, MINI).unwrap();
    let mut tables = Vec::new();
    for (tag, threads) in [("a", "1"), ("b", "2"), ("c", "1")] {
        let out = dir.join(format!("{tag}.csv"));
        let res = cellcov(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(
            res.status.success(),
            "{}",
            String::from_utf8_lossy(&res.stderr)
        );
        tables.push(fs::read(&out).unwrap());
    }
    assert_eq!(tables[0], tables[1], "thread count changed the table");
    assert_eq!(tables[0], tables[2], "rerun changed the table");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn seed_override_changes_simulation() {
    let dir = workdir("seed");
    let cfg = dir.join("mini.toml");
    fs::write(&cfg, MINI).unwrap();
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    assert!(cellcov(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        a.to_str().unwrap()
    ])
    .status
    .success());
    assert!(cellcov(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "77",
        "--out",
        b.to_str().unwrap()
    ])
    .status
    .success());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn compare_reports_max_gap() {
    let dir = workdir("compare");
    let cfg = dir.join("mini.toml");
    fs::write(&cfg, MINI.replace("trials = 8", "trials = 40")).unwrap();
    let out = dir.join("cmp.csv");
    let res = cellcov(&[
        "compare",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(
        stdout.contains("max |simulated - analytic_exact|"),
        "stdout: {stdout}"
    );
    let table = fs::read_to_string(&out).unwrap();
    for line in table.lines().skip(1) {
        // Compare rows carry both analytic and simulated values.
        assert!(!line.contains(",,"), "incomplete row: {line}");
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn optimize_reports_both_methods() {
    let dir = workdir("optimize");
    let cfg = dir.join("mini.toml");
    fs::write(&cfg, MINI.replace("theta_max = 4", "theta_max = 19")).unwrap();
    let report = dir.join("opt.json");
    let res = cellcov(&[
        "optimize",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("closed_form: theta = [10]"), "{stdout}");
    assert!(stdout.contains("exhaustive:  theta = [11]"), "{stdout}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["closed_form"]["thresholds"][0], 10);
    assert_eq!(json["exhaustive"]["thresholds"][0], 11);
    assert!(json["derivative_trace"].is_array());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn json_format_emits_objects() {
    let dir = workdir("json");
    let cfg = dir.join("mini.toml");
    fs::write(&cfg, MINI).unwrap();
    let out = dir.join("rows.json");
    let res = cellcov(&[
        "analytic",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let rows: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 5);
    assert!(rows[0]["analytic_exact"].is_f64());
    assert_eq!(rows[0]["thresholds"][0], 0);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn validate_passes_on_sound_scenario() {
    let dir = workdir("validate");
    let cfg = dir.join("mini.toml");
    fs::write(&cfg, MINI).unwrap();
    let res = cellcov(&["validate", "--config", cfg.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(res.status.success(), "stdout: {stdout}");
    assert!(stdout.contains("[PASS] tier 1 distance law"), "{stdout}");
    assert!(stdout.contains("occupancy histogram"), "{stdout}");
    assert!(stdout.contains("activity fraction"), "{stdout}");
    assert!(!stdout.contains("[FAIL]"), "{stdout}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn hetnet_grid_rows_are_lexicographically_sorted() {
    let dir = workdir("grid");
    let cfg = dir.join("het.toml");
    fs::write(
        &cfg,
        r#"
[scenario]
pathloss_exponent = 4.0
target_sinr_db = 0.0
user_density_per_m2 = 4.162277660168379e-3

[[scenario.tiers]]
bs_density_per_m2 = 1e-4
tx_power_watts = 10.0

[[scenario.tiers]]
bs_density_per_m2 = 1e-3
tx_power_watts = 1.0

[region]
width_m = 800.0
height_m = 800.0

[policy]
kind = "threshold-sweep"
theta_max = [4, 4]
theta_step = [2, 2]

[run]
master_seed = 3
trials = 6
"#,
    )
    .unwrap();
    let out = dir.join("grid.csv");
    let res = cellcov(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let table = fs::read_to_string(&out).unwrap();
    let mut lines = table.lines();
    assert!(lines.next().unwrap().starts_with("theta_1,theta_2,"));
    let keys: Vec<(u32, u32)> = lines
        .map(|l| {
            let mut it = l.split(',');
            (
                it.next().unwrap().parse().unwrap(),
                it.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(keys.len(), 9);
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted, "rows must be sorted by sweep variables");
    let _ = fs::remove_dir_all(&dir);
}
