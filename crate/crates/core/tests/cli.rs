//! End-to-end checks of the riskcal binary.

use std::process::Command;

fn riskcal() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_riskcal"));
    cmd.env_remove("RISKCAL_SEED");
    cmd
}

fn write_grid(path: &std::path::Path, n: usize) {
    let values: Vec<String> = (0..n).map(|j| format!("[{}]", j as f64 / (n - 1) as f64)).collect();
    std::fs::write(
        path,
        format!("{{\"dim\":1,\"shape\":null,\"values\":[{}]}}", values.join(",")),
    )
    .unwrap();
}

fn write_constant_loss(path: &std::path::Path, n: usize, cols: usize, value: f64) {
    let mut text = format!("# n={n} N={cols} m=1 bounded=1\n");
    for _ in 0..n {
        let row: Vec<String> = (0..cols).map(|_| value.to_string()).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn zero_loss_certifies_the_whole_grid() {
    let dir = tempfile::tempdir().unwrap();
    let loss = dir.path().join("loss.csv");
    let grid = dir.path().join("grid.json");
    let out = dir.path().join("report.json");
    write_constant_loss(&loss, 50, 8, 0.0);
    write_grid(&grid, 8);
    let status = riskcal()
        .args(["calibrate", "--loss"])
        .arg(&loss)
        .arg("--grid")
        .arg(&grid)
        .args(["--alpha", "0.2", "--delta", "0.1", "--procedure", "bonferroni", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rejected = report["rejection"]["rejected"].as_array().unwrap();
    assert_eq!(rejected.len(), 8);
    // Sup-selection picks the largest certified parameter.
    assert_eq!(report["selected"]["index"], 7);
    assert_eq!(report["abstained"], false);
}

#[test]
fn hopeless_loss_abstains_with_success_exit() {
    let dir = tempfile::tempdir().unwrap();
    let loss = dir.path().join("loss.csv");
    let grid = dir.path().join("grid.json");
    let out = dir.path().join("report.json");
    write_constant_loss(&loss, 50, 4, 1.0);
    write_grid(&grid, 4);
    let status = riskcal()
        .args(["calibrate", "--loss"])
        .arg(&loss)
        .arg("--grid")
        .arg(&grid)
        .args(["--alpha", "0.2", "--delta", "0.1", "--procedure", "holm", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    // Abstention is a success, not an error.
    assert_eq!(status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["abstained"], true);
    assert!(report["selected"].is_null());
}

#[test]
fn missing_input_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    write_grid(&grid, 4);
    let status = riskcal()
        .args(["calibrate", "--loss", "/nonexistent/loss.csv", "--grid"])
        .arg(&grid)
        .args(["--alpha", "0.2", "--delta", "0.1", "--procedure", "bonferroni", "--out"])
        .arg(dir.path().join("report.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn simulate_rejects_unit_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("loss.csv");
    let status = riskcal()
        .args(["simulate", "--n", "50", "--N", "5", "--corr", "1.0", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic_and_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let status = riskcal()
            .args(["simulate", "--n", "60", "--N", "7", "--corr", "0.4", "--seed", "7", "--out"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("# n=60 N=7 m=1 bounded=1\n"));
    assert_eq!(text.lines().count(), 61);
}
