use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stressgraph"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "`{}` failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// Small synthetic dataset: `channels` electrodes, 16 trials per class, 320 samples.
fn synth(dir: &Path, channels: usize) -> (PathBuf, PathBuf) {
    let out = dir.join("data");
    ok(&[
        "synth",
        "--out",
        s(&out),
        "--n-relaxed",
        "16",
        "--n-stressed",
        "16",
        "--channels",
        &channels.to_string(),
        "--samples",
        "320",
        "--signature-channels",
        "0,1",
        "--amplitude",
        "4",
    ]);
    (out.join("manifest.json"), out.join("layout.csv"))
}

#[test]
fn synth_writes_manifest_trials_and_layout() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, layout) = synth(dir.path(), 6);
    let entries = json(manifest.clone());
    let entries = entries.as_array().unwrap();
    assert_eq!(entries.len(), 32);
    let stressed = entries.iter().filter(|e| e["label"] == "stressed").count();
    assert_eq!(stressed, 16);
    let trials = std::fs::read_dir(manifest.parent().unwrap().join("trials"))
        .unwrap()
        .count();
    assert_eq!(trials, 32);
    let rows = std::fs::read_to_string(layout)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("name"))
        .count();
    assert_eq!(rows, 6);
}

#[test]
fn graph_on_one_trial_writes_adjacency_and_four_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, layout) = synth(dir.path(), 6);
    let trial = manifest.parent().unwrap().join("trials").join("stressed-0000.csv");
    let out = dir.path().join("g");
    ok(&["graph", "--trial", s(&trial), "--layout", s(&layout), "--out", s(&out)]);
    let metrics = json(out.join("metrics.json"));
    let keys: Vec<&String> = metrics.as_object().unwrap().keys().collect();
    assert_eq!(keys.len(), 4, "{keys:?}");
    for k in [
        "algebraic_connectivity",
        "avg_clustering",
        "avg_shortest_path",
        "avg_degree",
    ] {
        assert!(metrics.get(k).is_some(), "missing {k}");
    }
    let rows = std::fs::read_to_string(out.join("adjacency.csv")).unwrap();
    assert_eq!(rows.lines().count(), 6);
}

#[test]
fn invalid_k_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, layout) = synth(dir.path(), 4);
    let out = run(&[
        "graph",
        "--manifest",
        s(&manifest),
        "--layout",
        s(&layout),
        "--k",
        "99",
        "--out",
        s(&dir.path().join("g")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_and_missing_input_errors_exit_one() {
    assert_eq!(run(&["train"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing.json");
    let out = run(&["train", "--manifest", s(&missing), "--out", s(&dir.path().join("t"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(run(&["--help"]).status.success());
}

#[test]
fn unknown_protocol_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, layout) = synth(dir.path(), 4);
    let out = run(&[
        "ablate",
        "--manifest",
        s(&manifest),
        "--layout",
        s(&layout),
        "--protocol",
        "lobotomy",
        "--out",
        s(&dir.path().join("a")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn train_with_two_runs_reports_mean_and_std() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, layout) = synth(dir.path(), 4);
    let out = dir.path().join("t");
    ok(&[
        "train",
        "--manifest",
        s(&manifest),
        "--layout",
        s(&layout),
        "--runs",
        "2",
        "--seed",
        "7",
        "--epochs",
        "2",
        "--out",
        s(&out),
    ]);
    for tag in ["run01", "run02"] {
        let history = std::fs::read_to_string(out.join(format!("history_{tag}.csv"))).unwrap();
        assert_eq!(
            history.lines().next().unwrap(),
            "epoch,train_loss,train_acc,val_loss,val_acc"
        );
        assert_eq!(history.lines().count(), 3);
        assert!(out.join(format!("checkpoint_{tag}.json")).exists());
    }
    let report = json(out.join("metrics.json"));
    assert_eq!(report["runs"].as_array().unwrap().len(), 2);
    assert_eq!(report["runs"][1]["seed"], 8);
    assert!(report["mean"]["accuracy"].is_number());
    assert!(report["std"]["accuracy"].as_f64().unwrap() >= 0.0);
}

#[test]
fn mlp_baseline_trains() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, layout) = synth(dir.path(), 4);
    let out = dir.path().join("t");
    ok(&[
        "train",
        "--manifest",
        s(&manifest),
        "--layout",
        s(&layout),
        "--model",
        "mlp",
        "--epochs",
        "2",
        "--out",
        s(&out),
    ]);
    let report = json(out.join("metrics.json"));
    let acc = report["runs"][0]["test"]["accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
}

#[test]
fn sweep_covers_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, layout) = synth(dir.path(), 6);
    let out = dir.path().join("sw");
    ok(&[
        "sweep",
        "--manifest",
        s(&manifest),
        "--layout",
        s(&layout),
        "--epochs",
        "1",
        "--out",
        s(&out),
    ]);
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,tau,accuracy,precision,recall,f1,auc,balanced_accuracy"
    );
    assert_eq!(lines.count(), 9);
    assert_eq!(json(out.join("sweep.json")).as_array().unwrap().len(), 9);
}

#[test]
fn channel_ablation_writes_table_and_topomap() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, layout) = synth(dir.path(), 4);
    let out = dir.path().join("a");
    ok(&[
        "ablate",
        "--manifest",
        s(&manifest),
        "--layout",
        s(&layout),
        "--protocol",
        "channel_only",
        "--epochs",
        "1",
        "--out",
        s(&out),
    ]);
    let csv = std::fs::read_to_string(out.join("ablation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let svg = std::fs::read_to_string(out.join("figure.svg")).unwrap();
    assert_eq!(svg.matches("class=\"electrode\"").count(), 4);
    assert!(out.join("topomap.csv").exists());

    let topo = dir.path().join("tm");
    ok(&[
        "topomap",
        "--input",
        s(&out.join("topomap.csv")),
        "--layout",
        s(&layout),
        "--out",
        s(&topo),
    ]);
    let svg = std::fs::read_to_string(topo.join("topomap.svg")).unwrap();
    assert_eq!(svg.matches("class=\"electrode\"").count(), 4);
}

#[test]
fn segment_removed_draws_one_bar_per_segment() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, layout) = synth(dir.path(), 4);
    let out = dir.path().join("a");
    ok(&[
        "ablate",
        "--manifest",
        s(&manifest),
        "--layout",
        s(&layout),
        "--protocol",
        "segment_removed",
        "--epochs",
        "1",
        "--out",
        s(&out),
    ]);
    let svg = std::fs::read_to_string(out.join("figure.svg")).unwrap();
    assert_eq!(svg.matches("class=\"bar\"").count(), 10);
    let report = json(out.join("ablation.json"));
    assert_eq!(report["rows"].as_array().unwrap().len(), 10);
}

#[test]
fn gradcheck_passes_and_detects_corruption() {
    let stdout = ok(&["gradcheck"]);
    assert!(stdout.contains("passed"));
    assert_eq!(run(&["gradcheck", "--corrupt", "gcn.weight"]).status.code(), Some(2));
    assert_eq!(run(&["gradcheck", "--corrupt", "no.such.block"]).status.code(), Some(1));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"synth": {"n_relaxed": 3, "n_stressed": 5, "channels": 4, "samples": 100, "signature_channels": [0, 3]}}"#,
    )
    .unwrap();
    let out = dir.path().join("d");
    ok(&["synth", "--config", s(&cfg), "--n-stressed", "2", "--out", s(&out)]);
    let entries = json(out.join("manifest.json"));
    assert_eq!(entries.as_array().unwrap().len(), 5);

    std::fs::write(&cfg, r#"{"synth": {"no_such_key": 1}}"#).unwrap();
    assert_eq!(
        run(&["synth", "--config", s(&cfg), "--out", s(&out)]).status.code(),
        Some(1)
    );
}
