use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_colored-ldp"))
}

fn run(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    bin().args(args).arg("--config").arg(&cfg).arg("--out").arg(dir.join("out")).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

const BENCHMARK: &str = r#""model": { "m": 2, "mu": [0.5, 0.5], "C": [[3, 1], [1, 2]] }"#;

#[test]
fn generate_is_deterministic_and_round_trips() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let cfg = format!(r#"{{ {BENCHMARK}, "seed": 5, "generate": {{ "n": 3000 }} }}"#);
    assert!(run(a.path(), &["generate"], &cfg).status.success());
    assert!(run(b.path(), &["generate"], &cfg).status.success());
    for f in ["graph.txt", "neighborhoods.json", "manifest.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f} differs");
    }
    let manifest: Value = serde_json::from_str(&read(a.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["config"]["generate"]["n"], 3000);

    let c = TempDir::new().unwrap();
    let cfg_path = c.path().join("config.json");
    std::fs::write(&cfg_path, &cfg).unwrap();
    let o = bin()
        .args(["generate", "--seed", "6", "--out"])
        .arg(c.path().join("out"))
        .arg("--config")
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_ne!(read(a.path(), "graph.txt"), read(c.path(), "graph.txt"));

    // measure the generated file back
    let graph = a.path().join("out").join("graph.txt");
    let m = TempDir::new().unwrap();
    let cfg = format!(r#"{{ "measure": {{ "graph": "{}" }} }}"#, graph.display());
    assert!(run(m.path(), &["measure"], &cfg).status.success());
    assert_eq!(read(m.path(), "graph.txt"), read(a.path(), "graph.txt"));
    assert_eq!(read(m.path(), "pairs.json"), read(a.path(), "pairs.json"));
}

#[test]
fn malformed_graph_exits_2_with_line() {
    let d = TempDir::new().unwrap();
    std::fs::write(d.path().join("g.txt"), "3 1\n0 0 0\n0 1\n1 2 x\n").unwrap();
    let o = run(d.path(), &["measure"], r#"{ "measure": { "graph": "g.txt" } }"#);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn malformed_measure_exits_2_with_line() {
    let d = TempDir::new().unwrap();
    std::fs::write(d.path().join("pairs.json"), "{\n  \"m\": 2,\n  \"weights\": [[0.75, 0.25],\n  [0.25, oops]]\n}\n")
        .unwrap();
    let cfg = format!(
        r#"{{ {BENCHMARK}, "rate": {{ "function": "I_omega", "pairs": "pairs.json", "colors": {{ "m": 2, "weights": [0.5, 0.5] }} }} }}"#
    );
    let o = run(d.path(), &["rate"], &cfg);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn bad_kernels_are_rejected_at_load() {
    let d = TempDir::new().unwrap();
    let o = run(
        d.path(),
        &["generate"],
        r#"{ "model": { "m": 2, "mu": [0.5, 0.5], "C": [[1, 2], [3, 1]] }, "generate": { "n": 10 } }"#,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("(1,0)/(0,1)"), "{}", stderr(&o));
    let o = run(d.path(), &["generate"], r#"{ "model": { "m": 1, "mu": [1], "C": [[0]] }, "generate": { "n": 10 } }"#);
    assert_eq!(o.status.code(), Some(2));
    let o = run(d.path(), &["generate"], r#"{ "model": { "m": 1, "mu": [1], "C": [[1]] }, "generat": { "n": 10 } }"#);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn infeasible_counts_exit_3() {
    let d = TempDir::new().unwrap();
    // three vertices carry at most three edges
    let o = run(
        d.path(),
        &["sample-conditional"],
        r#"{ "sample_conditional": { "target": { "colors": [3], "edges": [[4]] } } }"#,
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn conditional_sample_meets_targets() {
    let d = TempDir::new().unwrap();
    let o = run(
        d.path(),
        &["sample-conditional"],
        r#"{ "sample_conditional": { "target": { "colors": [4, 6], "edges": [[3, 5], [0, 7]] } } }"#,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("targets met: true"));
}

#[test]
fn rates_at_zero_points_and_closed_forms() {
    let d = TempDir::new().unwrap();
    // ϖ = Cω⊗ω
    let cfg = format!(
        r#"{{ {BENCHMARK}, "rate": {{ "function": "I_omega",
            "pairs": {{ "m": 2, "weights": [[0.75, 0.25], [0.25, 0.5]] }},
            "colors": {{ "m": 2, "weights": [0.5, 0.5] }} }} }}"#
    );
    let o = run(d.path(), &["rate"], &cfg);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&read(d.path(), "rate.json")).unwrap();
    let v: f64 = report["value"].as_str().unwrap().parse().unwrap();
    assert!(v.abs() < 1e-14, "{v}");

    let cfg =
        r#"{ "model": { "m": 1, "mu": [1], "C": [[2]] }, "rate": { "function": "zeta", "x": [0.5, 1, 1.5, 3] } }"#;
    assert!(run(d.path(), &["rate"], cfg).status.success());
    for row in csv_rows(&read(d.path(), "zeta.csv")) {
        let (z, closed): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        assert!((z - closed).abs() <= 1e-8, "{row:?}");
    }

    let cfg = r#"{ "model": { "m": 1, "mu": [1], "C": [[4]] }, "degree_rate": { "laws": [ { "name": "empty", "probs": [1] }, { "name": "poisson", "poisson": 4 } ] } }"#;
    assert!(run(d.path(), &["degree-rate"], cfg).status.success());
    let rows = csv_rows(&read(d.path(), "degree_rate.csv"));
    let empty: f64 = rows[0][4].parse().unwrap();
    assert!((empty - 2.0 * (1.0 - (-2f64).exp())).abs() <= 1e-10);
    assert!(rows[1][4].parse::<f64>().unwrap().abs() <= 1e-10);
}

#[test]
fn edge_rate_tables() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{ "model": { "m": 1, "mu": [1], "C": [[2]] }, "seed": 3,
        "edge_rate": { "x": 1.5, "sizes": [250, 500, 1000, 2000],
            "monte_carlo": { "sizes": [100, 200], "replicas": [4000, 4000], "sampling": "tilt" } } }"#;
    let o = run(d.path(), &["edge-rate"], cfg);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&read(d.path(), "edge_rate.json")).unwrap();
    let fit = report["exact_fit"]["rate"].as_f64().unwrap();
    let zeta = report["zeta_closed_form"].as_f64().unwrap();
    assert!((fit - zeta).abs() / zeta <= 0.02, "{fit} vs {zeta}");
    assert_eq!(csv_rows(&read(d.path(), "monte_carlo.csv")).len(), 2);
    assert_eq!(csv_rows(&read(d.path(), "edge_rate.csv")).len(), 4);
}

#[test]
fn ising_table() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), &["ising"], r#"{ "ising": { "betas": [0, 0.25, 0.5, 1], "cs": [0.5, 1, 2] } }"#);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<Vec<f64>> = csv_rows(&read(d.path(), "ising.csv"))
        .into_iter()
        .map(|r| r[..5].iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 12);
    for r in &rows {
        assert!((r[2] - r[3]).abs() <= 1e-6, "{r:?}");
        if r[0] == 0.0 {
            assert!((r[2] - std::f64::consts::LN_2).abs() <= 1e-10 && (r[3] - std::f64::consts::LN_2).abs() <= 1e-10);
        }
    }
    // rows are β-major over three c values
    for i in 3..rows.len() {
        assert!(rows[i][2] >= rows[i - 3][2] - 1e-12);
    }
}

#[test]
fn validate_selected_suites() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), &["validate", "--suite", "ising", "--suite", "degree"], "{}");
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&read(d.path(), "validation.json")).unwrap();
    let suites: Vec<&str> =
        report["criteria"].as_array().unwrap().iter().map(|c| c["suite"].as_str().unwrap()).collect();
    assert_eq!(suites, ["degree", "ising"]);
    assert_eq!(report["passed"], true);
}

#[test]
fn tampered_tolerance_fails_loudly() {
    let d = TempDir::new().unwrap();
    let o = run(d.path(), &["validate", "--suite", "ising"], r#"{ "validate": { "tolerances": { "ising": 1e-30 } } }"#);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("[FAIL]"));
    assert!(stderr(&o).contains("ising"));
    let report: Value = serde_json::from_str(&read(d.path(), "validation.json")).unwrap();
    assert_eq!(report["passed"], false);

    let o = run(d.path(), &["validate", "--suite", "ising"], r#"{ "validate": { "tolerances": { "isnig": 1e-3 } } }"#);
    assert_eq!(o.status.code(), Some(2));
    let o = run(d.path(), &["validate", "--suite", "nope"], "{}");
    assert_eq!(o.status.code(), Some(2));
}
