use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn agentnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agentnet")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn demo_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/demo.toml")
}

fn read_json(p: impl AsRef<Path>) -> Value {
    serde_json::from_slice(&std::fs::read(p.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", p.as_ref().display())))
        .expect("valid json")
}

/// a <-> b, b -> c, plus a few posts.
const TINY_LOG: &str = r#"{"seq":0,"ts":0,"kind":"AgentCreated","payload":{"agent_id":"a","backstory":"likes cats","display_name":"A"}}
{"seq":1,"ts":0,"kind":"AgentCreated","payload":{"agent_id":"b","display_name":"B"}}
{"seq":2,"ts":0,"kind":"AgentCreated","payload":{"agent_id":"c","backstory":"likes dogs","display_name":"C"}}
{"seq":3,"ts":5,"kind":"Posted","payload":{"post_id":"p1","author_id":"a","text":"cats are wonderful people"}}
{"seq":4,"ts":6,"kind":"Posted","payload":{"post_id":"p2","author_id":"c","text":"dogs and humans"}}
{"seq":5,"ts":10,"kind":"Followed","payload":{"follower_id":"a","followee_id":"b"}}
{"seq":6,"ts":11,"kind":"Followed","payload":{"follower_id":"b","followee_id":"a"}}
{"seq":7,"ts":12,"kind":"Followed","payload":{"follower_id":"b","followee_id":"c"}}
"#;

fn tiny_log(dir: &Path) -> PathBuf {
    let p = dir.join("tiny.jsonl");
    std::fs::write(&p, TINY_LOG).unwrap();
    p
}

#[test]
fn graph_analysis_writes_tables_and_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let log = tiny_log(tmp.path());
    let out = tmp.path().join("out");
    let r = agentnet(&["analyze", "graph", "--log", s(&log), "--out", s(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    for f in ["figures_data/degree.csv", "figures_data/clustering.csv", "reports/paths.json", "reports/reciprocity.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
        assert!(out.join(format!("{f}.meta.json")).is_file(), "missing sidecar for {f}");
    }
    // two of the three arcs have a reverse
    let rec = read_json(out.join("reports/reciprocity.json"));
    assert!((rec["reciprocity"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12, "{rec}");
    assert_eq!(rec["edges"], 3);
    let degree = std::fs::read_to_string(out.join("figures_data/degree.csv")).unwrap();
    assert_eq!(degree.lines().next(), Some("degree,in,out,undirected,mutual"));
    let summary = read_json(out.join("reports/graph_summary.json"));
    assert_eq!(summary["nodes"], 3);
    assert_eq!(summary["largest_component"], 3);
}

#[test]
fn sidecar_hashes_the_written_file() {
    let tmp = tempfile::tempdir().unwrap();
    let log = tiny_log(tmp.path());
    let out = tmp.path().join("out");
    assert!(agentnet(&["ingest", "--input", s(&log), "--out", s(&out), "--strict"]).status.success());
    let events = std::fs::read(out.join("raw/events.jsonl")).unwrap();
    let meta = read_json(out.join("raw/events.jsonl.meta.json"));
    assert_eq!(meta["sha256"].as_str().unwrap(), hex(&Sha256::digest(&events)));
    assert_eq!(meta["command"], "ingest");
    // a strict ingest of canonical lines round-trips byte for byte
    assert_eq!(String::from_utf8(events).unwrap(), TINY_LOG);
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn missing_seed_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let r = agentnet(&["simulate", "--config", s(&demo_config()), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn bad_inputs_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let missing = tmp.path().join("nope.jsonl");
    assert_eq!(agentnet(&["analyze", "toxicity", "--log", s(&missing), "--out", s(&out)]).status.code(), Some(1));

    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "no_such_key = 3\n").unwrap();
    let log = tiny_log(tmp.path());
    let r = agentnet(&["analyze", "stance", "--log", s(&log), "--out", s(&out), "--config", s(&cfg)]);
    assert_eq!(r.status.code(), Some(1));

    let r = agentnet(&["predict", "--synthetic", "--log", s(&log), "--out", s(&out), "--seed", "1"]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn failing_analysis_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let log = tiny_log(tmp.path());
    let out = tmp.path().join("out");
    // three agents cannot fill a balanced prediction dataset
    let r = agentnet(&["predict", "--log", s(&log), "--out", s(&out), "--seed", "1"]);
    assert_eq!(r.status.code(), Some(2), "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn help_exits_cleanly() {
    let r = agentnet(&["--help"]);
    assert!(r.status.success());
    assert!(String::from_utf8_lossy(&r.stdout).contains("simulate"));
}

#[test]
fn simulate_is_reproducible_and_report_collects() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("small.toml");
    let demo = std::fs::read_to_string(demo_config()).unwrap();
    std::fs::write(&cfg, demo.replace("ticks = 40", "ticks = 12")).unwrap();
    let runs: Vec<PathBuf> = ["x", "y"].iter().map(|n| tmp.path().join(n)).collect();
    for out in &runs {
        let r = agentnet(&["simulate", "--config", s(&cfg), "--seed", "3", "--out", s(out)]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    for f in ["raw/events.jsonl", "raw/events.jsonl.meta.json", "reports/simulation.json"] {
        assert_eq!(std::fs::read(runs[0].join(f)).unwrap(), std::fs::read(runs[1].join(f)).unwrap(), "{f}");
    }
    let other = tmp.path().join("z");
    assert!(agentnet(&["simulate", "--config", s(&cfg), "--seed", "4", "--out", s(&other)]).status.success());
    assert_ne!(std::fs::read(runs[0].join("raw/events.jsonl")).unwrap(), std::fs::read(other.join("raw/events.jsonl")).unwrap());

    let out = &runs[0];
    let events = out.join("raw/events.jsonl");
    let r = agentnet(&["analyze", "stance", "--log", s(&events), "--out", s(out), "--config", s(&cfg)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(agentnet(&["report", "--out", s(out)]).status.success());
    let summary = read_json(out.join("reports/summary.json"));
    let text = summary.to_string();
    assert!(text.contains("simulation") && text.contains("stance"), "{text}");
}

#[test]
fn synthetic_prediction_runs_without_a_log() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let r = agentnet(&["predict", "--synthetic", "--out", s(&out), "--seed", "2"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let table = std::fs::read_to_string(out.join("figures_data/predict_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 5, "{table}");
    let report = read_json(out.join("reports/predict.json"));
    assert_eq!(report["source"], "synthetic");
}
