//! End-to-end CLI behavior: exit codes, output formats, and flag handling.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_muxcomm")
}

fn write_toy(name: &str, content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("muxcomm_cli_tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("spawn muxcomm")
}

const TOY: &str = "1 1 2 1\n1 2 3 2\n2 3 4 1\n2 4 1 1\n1 1 3 1\n";

#[test]
fn missing_file_exits_3_and_names_path() {
    let out = run(&["efficiency", "--input", "/definitely/not/here.edges"]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/definitely/not/here.edges"), "{stderr}");
}

#[test]
fn usage_errors_exit_2() {
    // unknown flag
    let out = run(&["efficiency", "--input", "x", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    // --top 0
    let out = run(&[
        "rank",
        "--input",
        "x",
        "--approach",
        "popularity",
        "--top",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // bad kmax
    let out = run(&["efficiency", "--input", "x", "--kmax", "zero"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn data_errors_exit_3() {
    let path = write_toy("selfloop.edges", "1 2 2 1\n");
    let out = run(&["efficiency", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("self-loop"), "{stderr}");

    // nonpositive gamma is a data error
    let path = write_toy("toy_gamma.edges", TOY);
    let out = run(&[
        "efficiency",
        "--input",
        path.to_str().unwrap(),
        "--gamma",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn numerical_failure_exits_4() {
    // an unreachable solver tolerance forces a non-convergence report
    let path = write_toy("toy_tol.edges", "1 1 2 1\n1 2 3 2\n");
    let out = run(&[
        "communicability",
        "--input",
        path.to_str().unwrap(),
        "--undirected",
        "--tol",
        "1e-30",
    ]);
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("did not converge"), "{stderr}");
}

#[test]
fn json_and_table_agree_to_printed_precision() {
    let path = write_toy("toy_parity.edges", TOY);
    let input = path.to_str().unwrap();
    let json_out = run(&[
        "efficiency",
        "--input",
        input,
        "--undirected",
        "--output",
        "json",
    ]);
    assert!(json_out.status.success());
    let table_out = run(&["efficiency", "--input", input, "--undirected"]);
    assert!(table_out.status.success());
    let table = String::from_utf8(table_out.stdout).unwrap();

    let report: serde_json::Value =
        serde_json::from_slice(&json_out.stdout).expect("valid JSON report");
    assert_eq!(report["schema_version"], 1);
    let rows = report["efficiency"]["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    for row in rows {
        let e_k = row["e_k"].as_f64().unwrap();
        let formatted = format!("{e_k:.6e}");
        assert!(
            table.contains(&formatted),
            "table lacks value {formatted} from JSON row {row}"
        );
        let pick = (
            row["pick"][0].as_i64().unwrap(),
            row["pick"][1].as_i64().unwrap(),
        );
        assert!(
            table.contains(&format!("({},{})", pick.0, pick.1)),
            "table lacks pick {pick:?}"
        );
    }
}

#[test]
fn rank_json_carries_recommendation_fields() {
    let path = write_toy("toy_rank.edges", TOY);
    let out = run(&[
        "rank",
        "--input",
        path.to_str().unwrap(),
        "--undirected",
        "--approach",
        "efficiency",
        "--k",
        "3",
        "--top",
        "2",
        "--output",
        "json",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let recs = report["ranking"]["recommendations"].as_array().unwrap();
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0]["rank"], 1);
    assert!(recs[0]["score"].as_f64().unwrap() >= recs[1]["score"].as_f64().unwrap());
    assert!(recs[0]["layers"].as_array().unwrap().len() >= 1);
    // the ranking section records the K actually used, which may fall
    // short of the budget when the recursion reaches its fixed point early
    let k = report["ranking"]["k"].as_u64().unwrap();
    assert!((1..=3).contains(&k), "k = {k}");
}

#[test]
fn perturb_compare_null_edge_and_single_format() {
    // single-layer format with scale 1.0 leaves every measure unchanged
    let path = write_toy("toy_single.edges", "1 2 1\n2 3 2\n3 1 1\n");
    let input = path.to_str().unwrap();
    let out = run(&[
        "perturb-compare",
        "--input",
        input,
        "--format",
        "single",
        "--edge",
        "1:1:2",
        "--mode",
        "scale:1.0",
        "--output",
        "json",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let delta = &report["perturbation"]["comparison"]["delta"];
    assert_eq!(delta["global_efficiency"].as_f64().unwrap(), 0.0);
    assert_eq!(delta["total_communicability"].as_f64().unwrap(), 0.0);

    // unknown target edge is a data error
    let out = run(&[
        "perturb-compare",
        "--input",
        input,
        "--format",
        "single",
        "--edge",
        "1:1:3",
        "--mode",
        "add:1",
    ]);
    assert_eq!(out.status.code(), Some(3));

    // an empty edge list compares the network against itself
    let out = run(&[
        "perturb-compare",
        "--input",
        input,
        "--format",
        "single",
        "--output",
        "json",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let delta = &report["perturbation"]["comparison"]["delta"];
    assert_eq!(delta["rho_supra"].as_f64().unwrap(), 0.0);
}

#[test]
fn timings_go_to_stderr_not_stdout() {
    let path = write_toy("toy_timing.edges", TOY);
    let out = run(&[
        "efficiency",
        "--input",
        path.to_str().unwrap(),
        "--undirected",
        "--timings",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(!stdout.contains("timing:"));
    assert!(stderr.contains("timing:"));
}
