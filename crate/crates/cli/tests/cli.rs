use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use hybrid_miner::event_log::write_xes;
use hybrid_miner::fixtures::l1;
use hybrid_miner::synthetic::order_handling;
use hybrid_miner::{discover_causal_graph, discover_hybrid_net, DiscoveryParams, EventLog, GraphParams, HybridSystemNet};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybrid-miner"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

fn write_l1(dir: &Path) -> String {
    let path = dir.join("l1.xes");
    let mut bytes = Vec::new();
    write_xes(&l1(), &mut bytes).unwrap();
    std::fs::write(&path, bytes).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn stats_reports_summary_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let log = write_l1(dir.path());
    let v: Value = serde_json::from_str(&ok(&["stats", "--log", &log])).unwrap();
    assert_eq!(v["summary"]["cases"], 100);
    assert_eq!(v["summary"]["events"], 580);
    assert_eq!(v["summary"]["classes"], 7);
    let tsv = ok(&["stats", "--log", &log, "--emit", "tsv"]);
    assert_eq!(tsv.trim_end(), hybrid_miner::DirectlyFollowsTable::build(&l1()).to_tsv().trim_end());
}

#[test]
fn log_can_come_from_stdin_in_any_format() {
    let mut child = bin()
        .args(["stats", "--log", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(l1().to_json().as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["raw_events"], 380);

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("log.txt");
    std::fs::write(&csv, "c,a\n1,x\n1,y\n2,x\n").unwrap();
    let v: Value = serde_json::from_str(&ok(&[
        "stats",
        "--log",
        csv.to_str().unwrap(),
        "--log-format",
        "csv",
        "--case-column",
        "c",
        "--activity-column",
        "a",
        "--timestamp-column",
        "",
    ]))
    .unwrap();
    assert_eq!(v["summary"]["cases"], 2);
}

#[test]
fn discover_graph_emits_json_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let log = write_l1(dir.path());
    let v: Value = serde_json::from_str(&ok(&["discover-graph", "--log", &log, "--t-rw", "0.1"])).unwrap();
    let params = GraphParams { t_rw: 0.1, ..Default::default() };
    let expected = discover_causal_graph(&l1(), &params).unwrap();
    assert_eq!(v["graph"], serde_json::to_value(expected.to_dump()).unwrap());
    assert_eq!(v["params"]["t_rw"], 0.1);

    let dot = ok(&["discover-graph", "--log", &log, "--t-rw", "0.1", "--emit", "dot"]);
    assert_eq!(dot, expected.to_dot());
    assert!(dot.contains("style=dashed, label=\"?\""));
}

#[test]
fn discover_net_writes_json_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("orders.json");
    let log = order_handling(800, 2);
    std::fs::write(&log_path, log.to_json()).unwrap();
    let out = dir.path().join("net.json");
    let scores = dir.path().join("scores.json");
    let summary = ok(&[
        "discover-net",
        "--log",
        log_path.to_str().unwrap(),
        "--t-freq",
        "10",
        "--w",
        "0.2",
        "--c",
        "1",
        "--t-rs",
        "0.8",
        "--t-rw",
        "0.75",
        "--t-replay",
        "0.9",
        "--out",
        out.to_str().unwrap(),
        "--scores",
        scores.to_str().unwrap(),
    ]);
    let summary: Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(summary["consistency"]["violations"], serde_json::json!([]));

    let params = DiscoveryParams {
        graph: GraphParams { t_freq: 10, ..Default::default() },
        ..Default::default()
    };
    let graph = discover_causal_graph(&log, &params.graph).unwrap();
    let expected = discover_hybrid_net(&log, &graph, &params).unwrap();
    let written = std::fs::read_to_string(&out).unwrap();
    assert_eq!(written, expected.net.to_json());
    assert_eq!(std::fs::read_to_string(dir.path().join("net.dot")).unwrap(), expected.net.to_dot());
    let scores: Value = serde_json::from_str(&std::fs::read_to_string(&scores).unwrap()).unwrap();
    assert_eq!(scores["candidates"].as_array().unwrap().len(), expected.candidates.len());
    assert_eq!(summary["counts"]["places"], expected.places().count());
}

#[test]
fn score_reports_three_scores() {
    let dir = tempfile::tempdir().unwrap();
    let log = write_l1(dir.path());
    let v: Value = serde_json::from_str(&ok(&["score", "--log", &log, "--place", "a->b,c"])).unwrap();
    let s = &v["score"];
    for key in ["freq", "rel", "glob"] {
        let x = s[key].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&x), "{v}");
    }
    assert_eq!(v["place"], "({a},{b,c})");
    assert_eq!(v["glob"], s["glob"]);

    let o = run(&["score", "--log", &log, "--place", "a b c"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["score", "--log", &log, "--place", "a->zebra"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn evaluate_a_stored_net() {
    let dir = tempfile::tempdir().unwrap();
    let log = write_l1(dir.path());
    let net = dir.path().join("net.json");
    ok(&["discover-net", "--log", &log, "--t-rs", "0.5", "--t-rw", "0.3", "--out", net.to_str().unwrap()]);
    let v: Value = serde_json::from_str(&ok(&["evaluate", "--net", net.to_str().unwrap(), "--log", &log])).unwrap();
    let hsn = HybridSystemNet::from_json(&std::fs::read_to_string(&net).unwrap()).unwrap();
    let expected = hybrid_miner::evaluate(&hsn, &l1()).unwrap();
    assert_eq!(v["report"], serde_json::to_value(expected).unwrap());

    let v: Value = serde_json::from_str(&ok(&["evaluate", "--log", &log, "--t-rs", "0.5", "--t-rw", "0.3"])).unwrap();
    assert_eq!(v["params"]["t_rs"], 0.5);
    assert!(v["report"]["fitness_trace"].is_number());
}

#[test]
fn sweep_emits_a_trend_table() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("orders.json");
    let log: EventLog = order_handling(600, 8);
    std::fs::write(&log_path, log.to_json()).unwrap();
    let csv = ok(&[
        "evaluate",
        "--log",
        log_path.to_str().unwrap(),
        "--t-rs",
        "0.5",
        "--t-rw",
        "0.3",
        "--sweep",
        "t-replay=0.7,0.8,0.9,1.0",
    ]);
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["t_replay", "transitions", "places", "sure", "unsure", "fitness", "precision"]);
    assert_eq!(rows.len(), 5);
    for (row, t) in rows[1..].iter().zip([0.7, 0.8, 0.9, 1.0]) {
        let mut p = DiscoveryParams { t_replay: t, ..Default::default() };
        p.graph.t_rs = 0.5;
        p.graph.t_rw = 0.3;
        let graph = discover_causal_graph(&log, &p.graph).unwrap();
        let d = discover_hybrid_net(&log, &graph, &p).unwrap();
        assert_eq!(row[2].parse::<usize>().unwrap(), d.places().count());
        let fitness: f64 = row[5].parse().unwrap();
        assert_eq!(fitness, hybrid_miner::fitness(&d.net, &log).unwrap());
    }
    // higher thresholds never add places
    let places: Vec<usize> = rows[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(places.windows(2).all(|w| w[0] >= w[1]), "{places:?}");

    let o = run(&["evaluate", "--log", log_path.to_str().unwrap(), "--sweep", "colour=1,2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["evaluate", "--log", log_path.to_str().unwrap(), "--sweep", "t-rs=0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn export_converts_a_net() {
    let dir = tempfile::tempdir().unwrap();
    let log = write_l1(dir.path());
    let net = dir.path().join("net.json");
    ok(&["discover-net", "--log", &log, "--out", net.to_str().unwrap()]);
    let json = ok(&["export", "--net", net.to_str().unwrap(), "--format", "json"]);
    assert_eq!(json.trim_end(), std::fs::read_to_string(&net).unwrap().trim_end());
    assert!(ok(&["export", "--net", net.to_str().unwrap(), "--format", "pnml"]).contains("<pnml"));
    assert!(ok(&["export", "--net", net.to_str().unwrap(), "--format", "dot"]).starts_with("digraph"));
}

#[test]
fn gen_log_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.xes");
    let b = dir.path().join("b.xes");
    ok(&["gen-log", "--model", "order-handling", "--cases", "300", "--seed", "4", "--out", a.to_str().unwrap()]);
    ok(&["gen-log", "--cases", "300", "--seed", "4", "--out", b.to_str().unwrap()]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v: Value = serde_json::from_str(&ok(&["stats", "--log", a.to_str().unwrap()])).unwrap();
    assert_eq!(v["summary"]["cases"], 300);

    let json = ok(&["gen-log", "--cases", "50", "--seed", "1", "--format", "json"]);
    assert_eq!(EventLog::from_json(json.as_bytes()).unwrap(), order_handling(50, 1));
    let csv = ok(&["gen-log", "--cases", "50", "--seed", "1", "--format", "csv"]);
    assert!(csv.starts_with("case,activity,timestamp"));
}

#[test]
fn exit_codes_separate_usage_from_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let log = write_l1(dir.path());
    // t_rs below t_rw
    let o = run(&["discover-graph", "--log", &log, "--t-rs", "0.3", "--t-rw", "0.6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("t_rs"));
    // unknown flag
    assert_eq!(run(&["discover-net", "--log", &log, "--frobnicate"]).status.code(), Some(2));
    // missing file and malformed log
    assert_eq!(run(&["stats", "--log", "/nonexistent/log.xes"]).status.code(), Some(1));
    let bad = dir.path().join("bad.xes");
    std::fs::write(&bad, "<log><trace><event>").unwrap();
    assert_eq!(run(&["stats", "--log", bad.to_str().unwrap()]).status.code(), Some(1));
    let bad_net = dir.path().join("net.json");
    std::fs::write(&bad_net, "{}").unwrap();
    assert_eq!(run(&["export", "--net", bad_net.to_str().unwrap(), "--format", "dot"]).status.code(), Some(1));
}

#[test]
fn parameters_come_from_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let log = write_l1(dir.path());
    let config = dir.path().join("miner.toml");
    std::fs::write(&config, "[defaults]\nt_rs = 0.6\nt_rw = 0.4\n").unwrap();
    let v: Value = serde_json::from_str(&ok(&["discover-graph", "--log", &log, "--config", config.to_str().unwrap(), "--t-rw", "0.2"])).unwrap();
    assert_eq!(v["params"]["t_rs"], 0.6);
    assert_eq!(v["params"]["t_rw"], 0.2);
}
