use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use irg::harness::emit::{parse_records_csv, parse_records_jsonl};

const SMALL: &str = r#"
[space]
kind = "torus"
dimension = 2

[connection]
family = "constant"
p = 0.05

[process]
kind = "poisson"
intensity = 60.0

[run]
replications = 300
master_seed = 11
statistics = ["D0", "N2", "H2"]
"#;

fn irg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irg"))
        .args(args)
        .output()
        .expect("run irg")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_csv_and_jsonl_that_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let c = cfg.to_str().unwrap();
    let o = irg(&["simulate", "-c", c, "--out", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let o = irg(&["simulate", "-c", c, "--out", b.to_str().unwrap(), "--format", "jsonl"]);
    assert_eq!(o.status.code(), Some(0));

    let csv = fs::read_to_string(a.join("records.csv")).unwrap();
    assert_eq!(csv.lines().count(), 301);
    assert_eq!(csv.lines().next().unwrap(), "replication,seed,vertices,D0,N2,H2");
    let (cols, from_csv) = parse_records_csv(&csv).unwrap();
    let jsonl = fs::read_to_string(b.join("records.jsonl")).unwrap();
    assert_eq!(parse_records_jsonl(&jsonl, &cols).unwrap(), from_csv);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["replications"], 300);
    assert_eq!(summary["config"]["run"]["master_seed"], 11);
    for stat in ["D0", "N2", "H2"] {
        assert!(a.join(format!("plot_pmf_{stat}.dat")).exists());
        assert!(a.join(format!("plot_poisson_{stat}.dat")).exists());
    }
}

#[test]
fn overrides_and_graph_dumps() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let out = tmp.path().join("o");
    let o = irg(&[
        "simulate", "-c", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(),
        "--process", "binomial", "--count", "40", "--replications", "25",
        "--seed", "3", "--dump-graphs", "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, records) = parse_records_csv(&fs::read_to_string(out.join("records.csv")).unwrap()).unwrap();
    assert_eq!(records.len(), 25);
    assert!(records.iter().all(|r| r.vertices == 40));
    let edges = fs::read_to_string(out.join("graphs/rep_1.edges")).unwrap();
    let g = irg::Graph::read_edge_list(edges.as_bytes()).unwrap();
    assert_eq!(g.edge_count() as u64, records[1].values[2]);
    assert!(!out.join("graphs/rep_2.edges").exists());
}

#[test]
fn thread_count_does_not_change_records() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let mut files = Vec::new();
    for threads in ["1", "3"] {
        let out = tmp.path().join(format!("t{threads}"));
        let o = Command::new(env!("CARGO_BIN_EXE_irg"))
            .args(["simulate", "-c", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .env("IRG_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        files.push(fs::read(out.join("records.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn failing_verdict_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{SMALL}\n[tolerances]\nmean_se = 0.0\n");
    let cfg = write_config(tmp.path(), "strict.toml", &text);
    let o = irg(&["simulate", "-c", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL mecke-"));
}

#[test]
fn parse_errors_carry_location_and_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = SMALL.replace("p = 0.05", "p = ");
    let cfg = write_config(tmp.path(), "bad.toml", &bad);
    let o = irg(&["simulate", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("bad.toml:8:"), "{err}");

    let unknown = SMALL.replace("p = 0.05", "p = 0.05\nradius = 3");
    let cfg = write_config(tmp.path(), "unknown.toml", &unknown);
    let o = irg(&["simulate", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("radius"), "{}", stderr(&o));

    let o = irg(&["simulate", "-c", tmp.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.toml"));
}

#[test]
fn expect_bound_and_calibrate_print_json() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL);
    let c = cfg.to_str().unwrap();

    let o = irg(&["expect", "-c", c, "--formula", "D0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let exact = 60.0 * (-60.0f64 * 0.05).exp();
    assert!((v["value"].as_f64().unwrap() - exact).abs() < 1e-12);
    assert_eq!(v["std_error"], 0.0);

    let o = irg(&["bound", "-c", c, "--kind", "edge"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let alpha = 60.0f64 * 60.0 * 0.05 / 2.0;
    assert!((v["alpha"].as_f64().unwrap() - alpha).abs() < 1e-9);
    // (1 ^ 1/alpha) s^3 p^2 for a constant kernel
    let tv = 60f64.powi(3) * 0.05f64.powi(2) / alpha;
    assert!((v["tv_bound"].as_f64().unwrap() - tv).abs() < 1e-9);

    let o = irg(&["calibrate", "-c", c, "--target", "0.5", "--statistic", "D0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let p = v["value"].as_f64().unwrap();
    assert!((60.0 * (-60.0 * p).exp() - 0.5).abs() < 1e-9);

    let o = irg(&["bound", "-c", c, "--kind", "ustat"]);
    assert_eq!(o.status.code(), Some(2), "constant 0 < p < 1 is not an indicator");
}

#[test]
fn sweep_and_counterexample_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let text = SMALL.replace("replications = 300", "replications = 500");
    let cfg = write_config(tmp.path(), "small.toml", &text);
    let out = tmp.path().join("sweep");
    let o = irg(&[
        "sweep", "-c", cfg.to_str().unwrap(), "--grid", "20,40", "--out", out.to_str().unwrap(),
    ]);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(out.join("plot_sweep_dtv.dat").exists());

    let o = irg(&["sweep", "-c", cfg.to_str().unwrap(), "--grid", "40,20"]);
    assert_eq!(o.status.code(), Some(2));

    let out = tmp.path().join("ce");
    let o = irg(&[
        "counterexample", "--s", "200", "--replications", "3000", "--seed", "4",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("PASS bernoulli-p1-D0"));
    assert!(out.join("records.csv").exists());
}
