//! End-to-end checks of the `pcnpath` binary: JSON outputs, exit codes,
//! and determinism of the simulation files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_str()
        .unwrap()
        .to_owned()
}

fn pcnpath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcnpath"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn ingest_reports_counts() {
    let out = pcnpath(&["ingest", "--snapshot", &fixture("double_route.json")]);
    let report = stdout_json(&out);
    assert_eq!(report["raw_vertices"], 4);
    assert_eq!(report["raw_arcs"], 8);
    assert_eq!(report["kept_vertices"], 4);
    assert_eq!(report["kept_arcs"], 4);
    assert_eq!(report["dropped_no_policy"], 4);
    assert_eq!(report["dropped_isolated"], 0);
}

#[test]
fn ingest_missing_file_exits_2() {
    let out = pcnpath(&["ingest", "--snapshot", "/nonexistent/snapshot.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn plan_unidirectional_worked_example() {
    let out = pcnpath(&[
        "plan",
        "--snapshot",
        &fixture("double_route.json"),
        "--source",
        "s",
        "--destination",
        "t",
        "--amount",
        "10",
    ]);
    let plan = stdout_json(&out);
    assert_eq!(plan["found"], true);
    assert!((plan["total_fee"].as_f64().unwrap() - 7.6).abs() < 1e-9);
    let hops: Vec<&str> = plan["arcs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["target"].as_str().unwrap())
        .collect();
    assert_eq!(hops, ["i", "t"]);
    let amounts = plan["hop_amounts"].as_array().unwrap();
    assert!((amounts[0].as_f64().unwrap() - 17.6).abs() < 1e-9);
}

#[test]
fn plan_oracle_with_fee_table_finds_cheaper_route() {
    let uni = pcnpath(&[
        "plan",
        "--snapshot",
        &fixture("inconsistent_square.json"),
        "--fee-table",
        &fixture("inconsistent_square_fees.json"),
        "--source",
        "s",
        "--destination",
        "t",
        "--amount",
        "100",
        "--planner",
        "uni",
    ]);
    assert_eq!(stdout_json(&uni)["total_fee"], 30.0);

    let oracle = pcnpath(&[
        "plan",
        "--snapshot",
        &fixture("inconsistent_square.json"),
        "--fee-table",
        &fixture("inconsistent_square_fees.json"),
        "--source",
        "s",
        "--destination",
        "t",
        "--amount",
        "100",
        "--planner",
        "oracle",
    ]);
    let plan = stdout_json(&oracle);
    assert_eq!(plan["total_fee"], 25.0);
    let hops: Vec<&str> = plan["arcs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["target"].as_str().unwrap())
        .collect();
    assert_eq!(hops, ["j", "i", "t"]);
}

#[test]
fn plan_unknown_vertex_exits_2() {
    let out = pcnpath(&[
        "plan",
        "--snapshot",
        &fixture("double_route.json"),
        "--source",
        "nobody",
        "--destination",
        "t",
        "--amount",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plan_no_path_is_exit_0() {
    // t has no outgoing arcs, so t -> s finds nothing
    let out = pcnpath(&[
        "plan",
        "--snapshot",
        &fixture("double_route.json"),
        "--source",
        "t",
        "--destination",
        "s",
        "--amount",
        "10",
    ]);
    let plan = stdout_json(&out);
    assert_eq!(plan["found"], false);
    assert!(plan.get("total_fee").is_none());
}

#[test]
fn plan_barrier_on_single_arc() {
    let feasible = pcnpath(&[
        "plan",
        "--snapshot",
        &fixture("single_arc.json"),
        "--source",
        "alice",
        "--destination",
        "bob",
        "--amount",
        "10",
        "--planner",
        "barrier",
    ]);
    let plan = stdout_json(&feasible);
    assert_eq!(plan["found"], true);
    assert!((plan["total_fee"].as_f64().unwrap() - 3.0).abs() < 1e-9);

    // balance is 20: delivering 21 pushes the barrier fee to infinity
    let infeasible = pcnpath(&[
        "plan",
        "--snapshot",
        &fixture("single_arc.json"),
        "--source",
        "alice",
        "--destination",
        "bob",
        "--amount",
        "21",
        "--planner",
        "barrier",
    ]);
    let plan = stdout_json(&infeasible);
    assert_eq!(plan["found"], false);
}

#[test]
fn plan_bidirectional_reports_semantics() {
    let out = pcnpath(&[
        "plan",
        "--snapshot",
        &fixture("double_route.json"),
        "--source",
        "s",
        "--destination",
        "t",
        "--amount",
        "10",
        "--planner",
        "bi",
    ]);
    let plan = stdout_json(&out);
    assert_eq!(plan["found"], true);
    assert_eq!(plan["fee_semantics"], "source_fees_zero");
    assert!((plan["total_fee"].as_f64().unwrap() - 3.0).abs() < 1e-9);
}

#[test]
fn simulate_is_deterministic_and_writes_files() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let out = pcnpath(&[
            "simulate",
            "--snapshot",
            &fixture("double_route.json"),
            "--payments",
            "5",
            "--seed",
            "7",
            "--output-dir",
            dir.path().to_str().unwrap(),
        ]);
        let summary = stdout_json(&out);
        assert_eq!(summary["n_payments"], 5);
    }
    for file in ["payments.csv", "histogram.csv"] {
        let a = std::fs::read(dir_a.path().join(file)).unwrap();
        let b = std::fs::read(dir_b.path().join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical invocations");
    }
    let csv = std::fs::read_to_string(dir_a.path().join("payments.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6); // header + 5 rows
}

#[test]
fn verify_passes_and_honors_zero_cases() {
    let out = pcnpath(&["verify", "--cases", "25", "--seed", "11"]);
    let reports = stdout_json(&out);
    let all_passed = reports
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["failures"].as_array().unwrap().is_empty());
    assert!(all_passed);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("PASS"));

    let vacuous = pcnpath(&["verify", "--cases", "0"]);
    assert!(vacuous.status.success());
    let stderr = String::from_utf8_lossy(&vacuous.stderr);
    assert!(stderr.contains("warning"));
}

#[test]
fn seed_env_var_is_honored() {
    let with_flag = pcnpath(&[
        "simulate",
        "--snapshot",
        &fixture("double_route.json"),
        "--payments",
        "3",
        "--seed",
        "99",
        "--output-dir",
        tempfile::tempdir().unwrap().path().to_str().unwrap(),
    ]);
    let dir = tempfile::tempdir().unwrap();
    let with_env = Command::new(env!("CARGO_BIN_EXE_pcnpath"))
        .env("PCN_SEED", "99")
        .args([
            "simulate",
            "--snapshot",
            &fixture("double_route.json"),
            "--payments",
            "3",
            "--output-dir",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    let a = stdout_json(&with_flag);
    let b = stdout_json(&with_env);
    assert_eq!(a["uni_relaxations_mean"], b["uni_relaxations_mean"]);
    assert_eq!(a["reduction_pct_mean"], b["reduction_pct_mean"]);
}
