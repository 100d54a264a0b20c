//! End-to-end CLI tests: file formats, determinism, exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_corrclust"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn corrclust")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("read {name}: {e}"))
}

#[test]
fn gen_writes_graph_and_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["gen", "--kind", "two-cliques", "--n", "6", "--out", "g1.txt"],
    );
    assert!(out.status.success());
    let graph = read(tmp.path(), "g1.txt");
    assert_eq!(graph, "6 7\n0 1\n0 2\n0 3\n1 2\n3 4\n3 5\n4 5\n");
    let meta: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "g1.txt.meta.json")).unwrap();
    assert_eq!(meta["kind"], "two_cliques");
    assert_eq!(meta["gadgets"][0]["bridge"], serde_json::json!([0, 3]));
}

#[test]
fn gen_rejects_odd_two_cliques_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["gen", "--kind", "two-cliques", "--n", "7", "--out", "g.txt"],
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("even"), "{stderr}");
}

#[test]
fn gen_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["a.txt", "b.txt"] {
        let out = run_in(
            tmp.path(),
            &[
                "gen", "--kind", "planted", "--n", "100", "--k", "5", "--flip", "0.05",
                "--seed", "7", "--out", name,
            ],
        );
        assert!(out.status.success());
    }
    assert_eq!(read(tmp.path(), "a.txt"), read(tmp.path(), "b.txt"));
    assert_eq!(
        read(tmp.path(), "a.txt.meta.json"),
        read(tmp.path(), "b.txt.meta.json")
    );
}

#[test]
fn run_is_deterministic_and_reports_zero_cost_on_perfect_instance() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_in(
        tmp.path(),
        &[
            "gen", "--kind", "planted", "--n", "60", "--k", "4", "--flip", "0", "--seed",
            "1", "--out", "p.txt",
        ],
    )
    .status
    .success());
    for name in ["r1.json", "r2.json"] {
        let out = run_in(
            tmp.path(),
            &[
                "run", "--graph", "p.txt", "--epsilon", "0.3", "--seed", "5", "--order",
                "random", "--out", name,
            ],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let r1 = read(tmp.path(), "r1.json");
    assert_eq!(r1, read(tmp.path(), "r2.json"));
    let report: serde_json::Value = serde_json::from_str(&r1).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["cost"]["edge_cost"], 0);
    assert_eq!(report["epsilon"], "3/10");
    assert!(report["phase"].as_object().unwrap().len() == 60);
}

#[test]
fn run_rejects_bad_epsilon_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_in(
        tmp.path(),
        &["gen", "--kind", "clique", "--n", "5", "--out", "c.txt"],
    )
    .status
    .success());
    for eps in ["0", "1", "1.0", "x"] {
        let out = run_in(
            tmp.path(),
            &["run", "--graph", "c.txt", "--epsilon", eps, "--seed", "0"],
        );
        assert_eq!(out.status.code(), Some(2), "epsilon {eps}");
    }
}

#[test]
fn run_accepts_explicit_order_file_and_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_in(
        tmp.path(),
        &["gen", "--kind", "clique", "--n", "6", "--out", "c.txt"],
    )
    .status
    .success());
    assert!(run_in(
        tmp.path(),
        &[
            "sample", "--graph", "c.txt", "--epsilon", "0.5", "--seed", "3", "--out",
            "bundle.json",
        ],
    )
    .status
    .success());
    let bundle: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "bundle.json")).unwrap();
    let sample: Vec<u32> = bundle["S"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap() as u32)
        .collect();
    let order: Vec<String> = (0..6u32)
        .rev()
        .filter(|v| !sample.contains(v))
        .map(|v| v.to_string())
        .collect();
    std::fs::write(tmp.path().join("order.txt"), order.join("\n")).unwrap();
    let out = run_in(
        tmp.path(),
        &[
            "run", "--graph", "c.txt", "--epsilon", "0.5", "--seed", "3", "--bundle",
            "bundle.json", "--order", "file", "--order-file", "order.txt", "--out",
            "r.json",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(tmp.path(), "r.json")).unwrap();
    assert_eq!(report["cost"]["edge_cost"], 0);
    assert_eq!(report["order_source"], "file");

    // A non-permutation order file is a usage error.
    std::fs::write(tmp.path().join("bad.txt"), "0\n0\n").unwrap();
    let out = run_in(
        tmp.path(),
        &[
            "run", "--graph", "c.txt", "--epsilon", "0.5", "--seed", "3", "--order",
            "file", "--order-file", "bad.txt",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_matches_known_values_and_size_limit() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_in(
        tmp.path(),
        &["gen", "--kind", "two-cliques", "--n", "6", "--out", "g1.txt"],
    )
    .status
    .success());
    let out = run_in(tmp.path(), &["oracle", "--graph", "g1.txt", "--p", "inf"]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["opt_exact"], "1");
    assert_eq!(json["opt_edge_cost"], 1);

    assert!(run_in(
        tmp.path(),
        &["gen", "--kind", "clique", "--n", "5", "--out", "c5.txt"],
    )
    .status
    .success());
    let out = run_in(tmp.path(), &["oracle", "--graph", "c5.txt", "--p", "2"]);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["opt_cost"], 0.0);

    assert!(run_in(
        tmp.path(),
        &["gen", "--kind", "clique", "--n", "13", "--out", "c13.txt"],
    )
    .status
    .success());
    let out = run_in(tmp.path(), &["oracle", "--graph", "c13.txt", "--p", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("refuses n = 13"));
}

#[test]
fn sweep_rows_and_determinism_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--kind",
        "planted",
        "--n",
        "10",
        "--k",
        "2",
        "--flip",
        "0.1",
        "--epsilons",
        "0.3,0.5",
        "--instance-seeds",
        "2",
        "--order",
        "random",
        "--order-seeds",
        "2",
        "--out",
        "sweep.csv",
    ];
    let out = bin()
        .current_dir(tmp.path())
        .env("CORRCLUST_WORKERS", "1")
        .args(args)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = read(tmp.path(), "sweep.csv");
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(
        lines[0],
        "kind,n,instance_seed,epsilon,order_source,order_seed,edge_cost,l1,l2,linf,opt1_edge,optinf,planted_edge_cost"
    );
    assert_eq!(lines.len(), 1 + 2 * 2 * 2);
    // n = 10 ≤ 12: optimum columns filled; planted column filled.
    for row in &lines[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 13);
        assert!(!cells[10].is_empty() && !cells[11].is_empty() && !cells[12].is_empty());
    }

    let out = bin()
        .current_dir(tmp.path())
        .env("CORRCLUST_WORKERS", "4")
        .args(args)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(first, read(tmp.path(), "sweep.csv"));
}

#[test]
fn check_reports_all_seven_items() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_in(
        tmp.path(),
        &[
            "gen", "--kind", "planted", "--n", "30", "--k", "3", "--flip", "0.05",
            "--seed", "2", "--out", "p.txt",
        ],
    )
    .status
    .success());
    let out = run_in(
        tmp.path(),
        &["check", "--graph", "p.txt", "--epsilon", "0.5", "--seed", "4"],
    );
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for i in 1..=7 {
        let status = json[format!("item{i}")]["status"].as_str().unwrap();
        assert!(["holds", "violated", "vacuous"].contains(&status));
    }
}

#[test]
fn dump_metrics_has_frozen_header() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_in(
        tmp.path(),
        &["gen", "--kind", "clique", "--n", "4", "--out", "c.txt"],
    )
    .status
    .success());
    let out = run_in(
        tmp.path(),
        &["dump-metrics", "--graph", "c.txt", "--epsilon", "0.5", "--seed", "0"],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("u,v,dbar_num,dbar_den,dtilde_num,dtilde_den\n"));
    assert_eq!(text.lines().count(), 1 + 6);
}

#[test]
fn missing_input_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["run", "--graph", "nope.txt", "--epsilon", "0.5", "--seed", "0"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_flag_exits_2() {
    let out = bin().arg("--bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
