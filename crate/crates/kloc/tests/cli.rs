//! End-to-end tests of the `kloc` binary: exit codes, JSON shape, and the
//! pinned reproductions.

use std::process::{Command, Output};

use kloc::report::{QTableReport, Report};

fn kloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kloc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn analyze_q_emits_the_table_schema() {
    let out = kloc(&["analyze-q", "--p", "37"]);
    assert!(out.status.success());
    let table = QTableReport::from_json(&stdout(&out)).expect("valid table JSON");
    assert_eq!(table.p, 37);
    assert_eq!(table.rows.len(), 36);
    for row in &table.rows {
        if row.i == 31 {
            assert!(!row.splits);
            assert_eq!(row.irregular_index, Some(32));
        } else {
            assert!(row.splits, "unexpected non-split row at i = {}", row.i);
            assert_eq!(row.irregular_index, None);
        }
    }
}

#[test]
fn analyze_emits_the_report_schema() {
    // level 2 would build the degree-12 layer Q(mu_36) and its class group;
    // capping the level keeps this a schema test, not an endurance test
    let out = kloc(&["analyze", "--field", "x^2+1", "--p", "3", "--i", "1", "--max-level", "1"]);
    assert!(out.status.success());
    let report = Report::from_json(&stdout(&out)).expect("valid report JSON");
    assert_eq!((report.p, report.i), (3, 1));
    assert!(
        ["does_not_split", "splits_certified", "no_obstruction_up_to"]
            .contains(&report.verdict.kind.as_str())
    );
    assert!(report.jaulent.is_some(), "odd p carries a wild-kernel block");
}

#[test]
fn analyze_at_two_runs_without_wild_kernel_block() {
    let out = kloc(&["analyze", "--field", "x^2+1", "--p", "2", "--i", "1"]);
    assert!(out.status.success());
    let report = Report::from_json(&stdout(&out)).expect("valid report JSON");
    assert!(report.jaulent.is_none());
}

#[test]
fn input_errors_exit_one_with_json_error() {
    for args in [
        &["analyze", "--field", "x", "--p", "3", "--i", "1"][..],
        &["analyze", "--field", "x^2+1", "--p", "4", "--i", "1"],
        &["analyze", "--field", "x^2+1", "--p", "3", "--i", "0"],
        &["analyze-q", "--p", "2"],
        &["reproduce", "no-such-example"],
    ] {
        let out = kloc(args);
        assert_eq!(out.status.code(), Some(1), "args {args:?}");
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("JSON error body");
        assert!(v.get("error").is_some(), "args {args:?}");
    }
}

#[test]
fn degree_one_field_points_at_the_fast_path() {
    let out = kloc(&["analyze", "--field", "x", "--p", "3", "--i", "1"]);
    assert!(stdout(&out).contains("analyze-q"));
}

#[test]
fn reproduce_q_passes_for_a_regular_prime() {
    let out = kloc(&["reproduce", "example-Q", "--p", "5"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn cache_dir_flag_writes_entries() {
    let dir = tempfile::tempdir().unwrap();
    let out = kloc(&[
        "analyze",
        "--field",
        "x^2+23",
        "--p",
        "3",
        "--i",
        "1",
        "--max-level",
        "1",
        "--cache-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let entries = std::fs::read_dir(dir.path()).unwrap().count();
    assert!(entries > 0, "no cache entries were written");
}
