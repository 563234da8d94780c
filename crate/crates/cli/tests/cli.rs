use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dctopo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dctopo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn pareto_prints_table_rows() {
    let o = dctopo(&["pareto", "--nodes", "1024", "--degree", "4", "--fast"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("expr\tN\td\tx\ty\truntime_ms"));
    assert!(text.contains("L(L(L(DBJMod(4,2))))\t1024\t4\t6\t1.019531\t8.612"));
    assert!(text.contains("Pow(Prod(UniRing(1,4),UniRing(1,8)),2)\t1024\t4\t20\t0.999023\t8.580"));
    let lb = text.lines().find(|l| l.starts_with("@lower-bound")).unwrap();
    assert!(lb.ends_with("\t8.430"), "{lb}");
}

#[test]
fn pareto_writes_file_and_allreduce_doubles() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.tsv");
    let o = dctopo(&["pareto", "--nodes", "16", "--degree", "2", "--collective", "allreduce", "--out", path(&out)]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    let rs = stdout(&dctopo(&["pareto", "--nodes", "16", "--degree", "2"]));
    let first = |t: &str| -> f64 { t.lines().nth(1).unwrap().rsplit('\t').next().unwrap().parse().unwrap() };
    assert!((first(&text) - 2.0 * first(&rs)).abs() < 2e-3);
}

#[test]
fn schedule_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("lk");
    let o = dctopo(&["schedule", "--expr", "L(Complete(4))", "--collective", "allreduce", "--out", path(&base)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(summary.is_object());
    let topo = dir.path().join("lk.topology.json");
    for sched in ["lk.rs.jsonl", "lk.ag.jsonl"] {
        let s = dir.path().join(sched);
        let o = dctopo(&["validate", "--topology", path(&topo), "--schedule", path(&s)]);
        assert!(o.status.success(), "{sched}");
        let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(report["valid"], Value::Bool(true));
        assert_eq!(report["missing_count"], 0);
    }
}

#[test]
fn corrupted_schedule_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("ring");
    assert!(dctopo(&["schedule", "--expr", "UniRing(1,5)", "--out", path(&base)]).status.success());
    let s = dir.path().join("ring.rs.jsonl");
    let text = fs::read_to_string(&s).unwrap();
    let kept: Vec<&str> = text.lines().take(text.lines().count() - 1).collect();
    fs::write(&s, kept.join("\n")).unwrap();
    let topo = dir.path().join("ring.topology.json");
    let o = dctopo(&["validate", "--topology", path(&topo), "--schedule", path(&s)]);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["valid"], Value::Bool(false));
    assert!(report["missing_count"].as_u64().unwrap() > 0);
}

#[test]
fn integer_granularity_schedule_validates() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("gk");
    let o = dctopo(&["schedule", "--expr", "GenKautz(2,12)", "--granularity", "8", "--out", path(&base)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = dctopo(&[
        "validate",
        "--topology",
        path(&dir.path().join("gk.topology.json")),
        "--schedule",
        path(&dir.path().join("gk.rs.jsonl")),
    ]);
    assert!(o.status.success());
}

#[test]
fn bad_expression_reports_json_error() {
    let o = dctopo(&["graph", "--expr", "L(Complete(4)"]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["kind"], "parse");
    assert!(err["position"].is_u64());
    let o = dctopo(&["graph", "--expr", "Bogus(3)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn graph_formats() {
    let o = dctopo(&["graph", "--expr", "Complete(3)", "--format", "edges"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# n=3\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 6);
    let j: Value = serde_json::from_str(&stdout(&dctopo(&["graph", "--expr", "Complete(3)"]))).unwrap();
    assert_eq!(j["n"], 3);
    assert_eq!(j["arcs"].as_array().unwrap().len(), 6);
}

#[test]
fn emit_milp_matches_golden() {
    let o = dctopo(&["emit-milp", "--nodes", "4", "--degree", "2"]);
    assert!(o.status.success());
    let golden = include_str!("../../core/tests/golden/milp_4_2.lp");
    assert_eq!(stdout(&o), golden);
    assert_eq!(dctopo(&["emit-milp", "--nodes", "3", "--degree", "3"]).status.code(), Some(2));
}

#[test]
fn lower_bound_reference_setting() {
    let o = dctopo(&["lower-bound", "--nodes", "1024", "--degree", "4"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["x"], 5);
    let ms = v["runtime_ms"].as_f64().unwrap();
    assert!((ms - 8.430).abs() < 1e-3, "{ms}");
}

#[test]
fn simulate_expression_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    fs::write(&trace, "ready_us,size_bytes\n0,1048576\n10,2097152\n500,4096\n").unwrap();
    let o = dctopo(&["simulate", "--trace", path(&trace), "--expr", "L(L(L(DBJMod(4,2))))"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("layer\tready_ms\tduration_ms\tfinish_ms\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
    assert!(text.lines().last().unwrap().starts_with("# f_max_ms="));

    let o = dctopo(&["simulate", "--trace", path(&trace), "--compare", "--nodes", "64", "--degree", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("entry\tf_max_ms\tavg_layer_ms"));
    for row in ["ring\t", "dbt\t", "lower-bound\t"] {
        assert!(text.lines().any(|l| l.starts_with(row)), "{row}");
    }

    let o = dctopo(&["simulate", "--trace", path(&trace)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_rows() {
    let o = dctopo(&["sweep", "--from", "8", "--to", "12", "--degree", "2", "--fast"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("N\tbest\t"));
}
