//! End-to-end command-line behaviour: subcommands, exit codes, formats,
//! and file-based map descriptions.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semislant"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("semislant_test_{}_{name}", std::process::id()));
    p
}

#[test]
fn catalog_list_names_every_entry() {
    let out = run(&["catalog", "list"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in [
        "ex5_7",
        "ex5_8",
        "ex5_9",
        "ex5_10",
        "ex5_11",
        "polar4",
        "radial2",
        "warped_slant",
    ] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
    let json = run(&["catalog", "list", "--format", "json"]);
    let rows: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 8);
}

#[test]
fn analyze_passes_and_exits_zero_on_clean_entry() {
    let out = run(&["analyze", "ex5_9", "--samples", "6"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("theta = 1.570796326795"));
    assert!(text.contains("jhat             n/a"));
}

#[test]
fn analyze_exits_one_when_a_property_fails() {
    let out = run(&["analyze", "polar4", "--samples", "6"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("harmonic           no"));
    assert!(text.contains("totally geodesic   no"));
}

#[test]
fn analyze_json_reports_quarter_angle() {
    let out = run(&["analyze", "ex5_10", "--samples", "8", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let theta = report["summary"]["theta"].as_f64().unwrap();
    assert!((theta - std::f64::consts::FRAC_PI_4).abs() < 1e-9);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["checks"].as_array().unwrap().len(), 15);
}

#[test]
fn verify_single_check_reports_the_norm() {
    let out = run(&["verify", "eikonal", "ex5_7", "--samples", "5", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let check: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(check["name"], "eikonal");
    assert_eq!(check["values"]["hs_norm_squared"].as_f64().unwrap(), 4.0);
}

#[test]
fn unknown_target_and_bad_param_exit_two() {
    let out = run(&["analyze", "definitely_not_here"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["analyze", "ex5_7", "--param", "alpha"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["verify", "not_a_check", "ex5_7", "--samples", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parameters_override_defaults() {
    let out = run(&[
        "analyze",
        "ex5_11",
        "--param",
        "alpha=0.5235987755982988",
        "--param",
        "beta=0.5235987755982988",
        "--param",
        "gamma=1",
        "--samples",
        "5",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let theta = report["summary"]["theta"].as_f64().unwrap();
    // theta = arccos|sin(pi/3)| = pi/6
    assert!((theta - std::f64::consts::FRAC_PI_6).abs() < 1e-9);
}

#[test]
fn analyzes_a_map_description_file() {
    let path = tmp_path("mapspec.json");
    std::fs::write(
        &path,
        r#"{
            "name": "file_radial",
            "dim_source": 2,
            "dim_target": 1,
            "components": ["sqrt(x1^2 + x2^2)"],
            "metric_source": "euclidean",
            "metric_target": "euclidean",
            "J": "canonical",
            "box": {"min": [0.6, -0.4], "max": [1.6, 0.4]},
            "exclude": "x1^2 + x2^2 - 0.25"
        }"#,
    )
    .unwrap();
    let out = run(&["analyze", path.to_str().unwrap(), "--samples", "6", "--format", "json"]);
    // circular fibers: not harmonic, so the run reports a failure
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["spec_name"], "file_radial");
    assert_eq!(report["summary"]["umbilical"], true);
    std::fs::remove_file(&path).ok();
}

#[test]
fn malformed_file_exits_two() {
    let path = tmp_path("broken.json");
    std::fs::write(&path, "{\"name\": \"broken\"").unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_file(&path).ok();
}

#[test]
fn every_published_check_name_runs_under_verify() {
    let names = run(&["catalog", "checks"]);
    assert!(names.status.success());
    for name in stdout(&names).lines() {
        if name == "expectations" {
            // only produced by full catalog analyses
            continue;
        }
        let out = run(&["verify", name, "radial2", "--samples", "4"]);
        assert!(
            matches!(out.status.code(), Some(0) | Some(1)),
            "`verify {name}` exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn explicit_structure_matrix_in_a_file_spec() {
    let path = tmp_path("matrix_j.json");
    std::fs::write(
        &path,
        r#"{
            "name": "matrix_j",
            "dim_source": 2,
            "dim_target": 1,
            "components": ["x1"],
            "metric_source": "euclidean",
            "metric_target": "euclidean",
            "J": [["0", "-1"], ["1", "0"]],
            "box": {"min": [-1.0, -1.0], "max": [1.0, 1.0]}
        }"#,
    )
    .unwrap();
    let out = run(&["verify", "kahler", path.to_str().unwrap(), "--samples", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::remove_file(&path).ok();
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let path = tmp_path("report.json");
    let out = run(&[
        "analyze",
        "ex5_7",
        "--samples",
        "5",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["spec_name"], "ex5_7");
    std::fs::remove_file(&path).ok();
}
