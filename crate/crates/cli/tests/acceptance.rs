//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines are always shown.
//! Set `STRESSGRAPH_SAM40_MANIFEST` (and optionally `STRESSGRAPH_SAM40_LAYOUT`)
//! to add the real-data smoke run; otherwise it prints SKIP.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stressgraph::ablation::{run_ablation, AblationConfig, Protocol};
use stressgraph::data::{ElectrodeLayout, Label, Trial};
use stressgraph::eigen::symmetric_eigenvalues;
use stressgraph::graph::{
    functional_adjacency, fuse_adjacency, graph_metrics, structural_adjacency, Adjacency, AdjacencyKind, GraphConfig,
};
use stressgraph::models::{auc_roc, run_experiment, Metrics, ModelConfig, TrainConfig};
use stressgraph::nn::{gcn_apply, Tensor};
use stressgraph::synth::{generate, SynthSpec};

const GRADCHECK_TOLERANCE: f64 = 1e-4;
const GRADCHECK_LINEAR_TOLERANCE: f64 = 1e-8;
const GRADCHECK_BUDGET: Duration = Duration::from_secs(30);
const GRAPH_ORACLE_TOLERANCE: f64 = 1e-8;
const TRACE_TOLERANCE: f64 = 1e-9;
const EQUIVARIANCE_TOLERANCE: f64 = 1e-10;
const CONTRACT_INSTANCES: usize = 100;
const EQUIVARIANCE_INSTANCES: usize = 20;
const LEARN_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const LEARN_MIN_ACCURACY: f64 = 0.85;
const LEARN_MIN_AUC: f64 = 0.9;
const NULL_ACCURACY_BAND: (f64, f64) = (0.4, 0.6);
const LEARN_BUDGET: Duration = Duration::from_secs(15 * 60);
/// A full-length (3200-sample) training run takes about 105 s on one core, so
/// ten of them exceed the budget; the shortened trials keep every threshold.
const LEARN_SAMPLES: usize = 640;
const ABLATION_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const ABLATION_MIN_HITS: usize = 4;
const REAL_BAND: (f64, f64) = (0.525, 0.856);

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_stressgraph")
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(bin()).args(args).output().expect("launch stressgraph");
    let text = format!(
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    (out.status.code().unwrap_or(-1), text)
}

fn cli_ok(args: &[&str]) -> Result<String, String> {
    match cli(args) {
        (0, text) => Ok(text),
        (code, text) => Err(format!("`stressgraph {}` exited {code}: {text}", args.join(" "))),
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gradient_correctness() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("gc");
    let start = Instant::now();
    cli_ok(&[
        "gradcheck",
        "--out",
        out.to_str().unwrap(),
        "--tolerance",
        &GRADCHECK_TOLERANCE.to_string(),
    ])?;
    let elapsed = start.elapsed();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("gradcheck.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let mut worst = BTreeMap::new();
    for entry in report.as_array().ok_or("gradcheck.json is not a list")? {
        let name = entry["name"].as_str().unwrap_or("?").to_string();
        let max = entry["report"]["blocks"]
            .as_array()
            .ok_or("missing blocks")?
            .iter()
            .map(|b| b["max_rel_error"].as_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        worst.insert(name, max);
    }
    for (name, tol) in [
        ("stgcn", GRADCHECK_TOLERANCE),
        ("mlp", GRADCHECK_TOLERANCE),
        ("linear", GRADCHECK_LINEAR_TOLERANCE),
    ] {
        let e = *worst.get(name).ok_or_else(|| format!("no {name} entry"))?;
        ensure(e < tol, || format!("{name} max relative error {e:.3e} >= {tol:e}"))?;
    }
    ensure(elapsed < GRADCHECK_BUDGET, || format!("took {elapsed:?}"))?;
    let (code, _) = cli(&["gradcheck", "--corrupt", "gcn.weight"]);
    ensure(code != 0, || "corrupted gradient was not detected".into())?;
    Ok(format!(
        "stgcn {:.2e}, mlp {:.2e}, linear {:.2e} in {:.1?}; corrupted gcn.weight rejected",
        worst["stgcn"], worst["mlp"], worst["linear"], elapsed
    ))
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Adjacency {
    let mut w = vec![0.0; n * n];
    for &(i, j) in edges {
        w[i * n + j] = 1.0;
        w[j * n + i] = 1.0;
    }
    Adjacency::from_weights(AdjacencyKind::Fused, n, w).unwrap()
}

fn graph_oracles() -> Check {
    let close = |a: f64, b: f64| (a - b).abs() <= GRAPH_ORACLE_TOLERANCE;
    let k4 =
        graph_metrics(&adjacency(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])).map_err(|e| e.to_string())?;
    ensure(
        close(k4.algebraic_connectivity, 4.0)
            && close(k4.avg_clustering, 1.0)
            && close(k4.avg_shortest_path, 1.0)
            && close(k4.avg_degree, 3.0),
        || format!("K4 gave {k4:?}"),
    )?;
    let p3 = graph_metrics(&adjacency(3, &[(0, 1), (1, 2)])).map_err(|e| e.to_string())?;
    ensure(
        close(p3.algebraic_connectivity, 1.0)
            && close(p3.avg_clustering, 0.0)
            && close(p3.avg_shortest_path, 4.0 / 3.0)
            && close(p3.avg_degree, 4.0 / 3.0),
        || format!("P3 gave {p3:?}"),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = 10;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(-5.0..5.0);
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        let eig = symmetric_eigenvalues(&m, n).map_err(|e| e.to_string())?;
        let trace: f64 = (0..n).map(|i| m[i * n + i]).sum();
        worst = worst.max((eig.iter().sum::<f64>() - trace).abs());
    }
    ensure(worst <= TRACE_TOLERANCE, || format!("trace identity off by {worst:e}"))?;
    Ok(format!(
        "K4 and P3 exact to {GRAPH_ORACLE_TOLERANCE:e}; trace identity worst {worst:.1e}"
    ))
}

fn random_layout(n: usize, rng: &mut ChaCha8Rng) -> ElectrodeLayout {
    let channels: Vec<(String, [f64; 2])> = (0..n)
        .map(|i| (format!("C{i}"), [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]))
        .collect();
    ElectrodeLayout::new(channels).unwrap()
}

fn random_trial(n: usize, t: usize, rng: &mut ChaCha8Rng) -> Trial {
    // A shared component gives a spread of correlations on both sides of tau.
    let shared: Vec<f64> = (0..t).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mix = rng.gen_range(0.0..2.0);
            (0..t).map(|s| mix * shared[s] + rng.gen_range(-1.0..1.0)).collect()
        })
        .collect();
    Trial::from_rows("r", Label::Relaxed, &rows).unwrap()
}

fn construction_contracts() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut edges_seen = 0usize;
    for case in 0..CONTRACT_INSTANCES {
        let n = rng.gen_range(3..=16);
        let cfg = GraphConfig {
            k: rng.gen_range(1..n),
            tau: rng.gen_range(0.2..0.8),
            ..GraphConfig::default()
        };
        let layout = random_layout(n, &mut rng);
        let trial = random_trial(n, 64, &mut rng);
        let s = structural_adjacency(&layout, &cfg).map_err(|e| e.to_string())?;
        let f = functional_adjacency(&trial, &cfg).map_err(|e| e.to_string())?;
        let fused = fuse_adjacency(&s, &f).map_err(|e| e.to_string())?;
        for a in [&s, &f, &fused] {
            for i in 0..n {
                ensure(a.get(i, i) == 0.0, || format!("case {case}: nonzero diagonal"))?;
                for j in 0..n {
                    ensure(a.get(i, j) == a.get(j, i), || {
                        format!("case {case}: asymmetric at ({i},{j})")
                    })?;
                }
            }
        }
        for i in 0..n {
            let degree = (0..n).filter(|&j| s.get(i, j) > 0.0).count();
            ensure(degree >= cfg.k, || {
                format!("case {case}: node {i} has structural degree {degree} < k={}", cfg.k)
            })?;
            for j in 0..n {
                let v = f.get(i, j);
                ensure(v == 0.0 || v == 1.0, || format!("case {case}: functional entry {v}"))?;
                ensure(fused.get(i, j) == (s.get(i, j) + v) / 2.0, || {
                    format!("case {case}: fused is not the mean")
                })?;
            }
        }
        edges_seen += f.edge_count();
        let scaled_rows: Vec<Vec<f64>> = trial
            .rows()
            .map(|r| {
                let (a, b) = (rng.gen_range(0.5..4.0), rng.gen_range(-10.0..10.0));
                r.iter().map(|x| a * x + b).collect()
            })
            .collect();
        let scaled = Trial::from_rows("r", Label::Relaxed, &scaled_rows).unwrap();
        let f2 = functional_adjacency(&scaled, &cfg).map_err(|e| e.to_string())?;
        ensure(f2 == f, || {
            format!("case {case}: functional graph changed under a positive affine map")
        })?;
    }
    ensure(edges_seen > 0, || "no functional edges were ever produced".into())?;
    Ok(format!(
        "{CONTRACT_INSTANCES} random layouts and trials, {edges_seen} functional edges checked"
    ))
}

fn gcn_equivariance() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..EQUIVARIANCE_INSTANCES {
        let n = rng.gen_range(3..=10);
        let (f, f_out) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let layout = random_layout(n, &mut rng);
        let trial = random_trial(n, 48, &mut rng);
        let cfg = GraphConfig {
            k: rng.gen_range(1..n),
            ..GraphConfig::default()
        };
        let s = structural_adjacency(&layout, &cfg).map_err(|e| e.to_string())?;
        let fused = fuse_adjacency(&s, &functional_adjacency(&trial, &cfg).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let a_hat = stressgraph::graph::renormalize(&fused).map_err(|e| e.to_string())?;
        let z = Tensor::from_fn(&[n, f], |_| rng.gen_range(0.0..2.0));
        let w = Tensor::from_fn(&[f, f_out], |_| rng.gen_range(-1.0..1.0));
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let pz = Tensor::from_fn(&[n, f], |idx| z.data()[perm[idx / f] * f + idx % f]);
        let (out, _) = gcn_apply(&z, &a_hat, &w).map_err(|e| e.to_string())?;
        let (pout, _) = gcn_apply(&pz, &a_hat.permuted(&perm), &w).map_err(|e| e.to_string())?;
        for (i, &src) in perm.iter().enumerate() {
            for c in 0..f_out {
                worst = worst.max((pout.data()[i * f_out + c] - out.data()[src * f_out + c]).abs());
            }
        }
    }
    ensure(worst <= EQUIVARIANCE_TOLERANCE, || format!("max deviation {worst:e}"))?;
    Ok(format!("{EQUIVARIANCE_INSTANCES} instances, max deviation {worst:.1e}"))
}

fn strong_spec() -> SynthSpec {
    SynthSpec {
        samples: LEARN_SAMPLES,
        signature_channels: vec![2, 5, 8, 11, 14, 17, 20, 23],
        signature_amplitude: 5.0,
        shared_noise_gain: 1.0,
        ..SynthSpec::default()
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn learnability() -> Check {
    let start = Instant::now();
    let strong = generate(&strong_spec()).map_err(|e| e.to_string())?;
    ensure(strong.label_counts() == [120, 360], || {
        format!("strong set has {:?}", strong.label_counts())
    })?;
    let null = generate(&SynthSpec {
        samples: LEARN_SAMPLES,
        ..SynthSpec::null(240)
    })
    .map_err(|e| e.to_string())?;
    let run = |ds, seed| -> Result<(Metrics, f64), String> {
        let r = run_experiment(
            &ModelConfig::stgcn().with_seed(seed),
            ds,
            &TrainConfig {
                seed,
                ..TrainConfig::default()
            },
        )
        .map_err(|e| e.to_string())?;
        Ok((r.test.metrics, r.outcome.history.last().unwrap().train_accuracy))
    };
    let mut acc = Vec::new();
    let mut auc = Vec::new();
    let mut train_acc = Vec::new();
    for &s in &LEARN_SEEDS {
        let (m, t) = run(&strong, s)?;
        acc.push(m.accuracy);
        auc.push(m.auc_roc.unwrap_or(0.0));
        train_acc.push(t);
    }
    let mut null_acc = Vec::new();
    for &s in &LEARN_SEEDS {
        null_acc.push(run(&null, s)?.0.accuracy);
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "T={LEARN_SAMPLES}; strong accuracy {:.3} {:.3?}, AUC {:.3}, final train accuracy min {:.3}; null accuracy {:.3} {:.3?}; {:.0?}",
        mean(&acc),
        acc,
        mean(&auc),
        train_acc.iter().copied().fold(1.0, f64::min),
        mean(&null_acc),
        null_acc,
        elapsed
    );
    let ok = mean(&acc) >= LEARN_MIN_ACCURACY
        && mean(&auc) >= LEARN_MIN_AUC
        && (NULL_ACCURACY_BAND.0..=NULL_ACCURACY_BAND.1).contains(&mean(&null_acc))
        && elapsed <= LEARN_BUDGET;
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ablation_recoverability() -> Check {
    let base = SynthSpec {
        n_relaxed: 80,
        n_stressed: 80,
        channels: 8,
        samples: 640,
        ..SynthSpec::default()
    };
    let channels = generate(&SynthSpec {
        signature_channels: vec![2, 5],
        ..base.clone()
    })
    .map_err(|e| e.to_string())?;
    let planted: Vec<&str> = [2, 5]
        .iter()
        .map(|&c| channels.layout.electrodes()[c].name.as_str())
        .collect();
    let segments = generate(&SynthSpec {
        signature_channels: vec![1, 2, 5, 6],
        signature_segments: vec![1],
        ..base
    })
    .map_err(|e| e.to_string())?;
    let model = ModelConfig::stgcn();
    let train = TrainConfig::default();
    let cfg = AblationConfig::default();
    let mut channel_hits = 0;
    let mut segment_hits = 0;
    for &s in &ABLATION_SEEDS {
        let report =
            run_ablation(Protocol::ChannelOnly, &channels, &model, &train, &[s], &cfg).map_err(|e| e.to_string())?;
        let top: Vec<&str> = report.ranked().iter().take(3).map(|r| r.unit.as_str()).collect();
        if planted.iter().all(|p| top.contains(p)) {
            channel_hits += 1;
        }
        let report =
            run_ablation(Protocol::SegmentOnly, &segments, &model, &train, &[s], &cfg).map_err(|e| e.to_string())?;
        if report.ranked().first().map(|r| r.unit.as_str()) == Some("seg01") {
            segment_hits += 1;
        }
    }
    let detail =
        format!("channels {planted:?} in top 3 for {channel_hits}/5 seeds; seg01 first for {segment_hits}/5 seeds");
    if channel_hits >= ABLATION_MIN_HITS && segment_hits >= ABLATION_MIN_HITS {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    files
}

fn determinism() -> Check {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = root.path().join("data");
    let d = data.to_str().unwrap();
    let synth = |out: &str| {
        cli_ok(&[
            "synth",
            "--out",
            out,
            "--n-relaxed",
            "16",
            "--n-stressed",
            "16",
            "--channels",
            "8",
            "--samples",
            "320",
            "--signature-channels",
            "2,5",
            "--seed",
            "4",
        ])
    };
    synth(d)?;
    let data2 = root.path().join("data2");
    synth(data2.to_str().unwrap())?;
    ensure(tree(&data) == tree(&data2), || {
        "synth output differs between runs".into()
    })?;
    let manifest = data.join("manifest.json");
    let layout = data.join("layout.csv");
    let (m, l) = (manifest.to_str().unwrap(), layout.to_str().unwrap());
    let trial = data.join("trials").join("stressed-0000.csv");
    let commands: Vec<Vec<&str>> = vec![
        vec!["graph", "--trial", trial.to_str().unwrap(), "--layout", l],
        vec![
            "train",
            "--manifest",
            m,
            "--layout",
            l,
            "--runs",
            "2",
            "--seed",
            "7",
            "--epochs",
            "2",
        ],
        vec![
            "train",
            "--manifest",
            m,
            "--layout",
            l,
            "--model",
            "mlp",
            "--epochs",
            "2",
            "--seed",
            "3",
        ],
        vec![
            "ablate",
            "--manifest",
            m,
            "--layout",
            l,
            "--protocol",
            "channel_only",
            "--seeds",
            "1",
            "--epochs",
            "1",
        ],
        vec![
            "ablate",
            "--manifest",
            m,
            "--layout",
            l,
            "--protocol",
            "segment_removed",
            "--seeds",
            "1",
            "--epochs",
            "1",
        ],
    ];
    let mut compared = 0;
    for (i, args) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = root.path().join(format!("cmd{i}_{rep}"));
            let mut full = args.clone();
            let o = out.to_str().unwrap().to_string();
            full.extend(["--out", o.as_str()]);
            cli_ok(&full)?;
            outputs.push(tree(&out));
        }
        ensure(outputs[0] == outputs[1], || {
            format!("`{}` output differs between runs", args.join(" "))
        })?;
        compared += outputs[0].len();
    }
    let topo_in = root.path().join("cmd3_0").join("topomap.csv");
    let topo: Vec<Vec<u8>> = (0..2)
        .map(|rep| {
            let out = root.path().join(format!("topo{rep}"));
            cli_ok(&[
                "topomap",
                "--input",
                topo_in.to_str().unwrap(),
                "--layout",
                l,
                "--out",
                out.to_str().unwrap(),
            ])?;
            std::fs::read(out.join("topomap.svg")).map_err(|e| e.to_string())
        })
        .collect::<Result<_, _>>()?;
    ensure(topo[0] == topo[1], || "topomap SVG differs between runs".into())?;
    Ok(format!(
        "{} generated files and {compared} report files byte-identical across repeated runs",
        tree(&data).len()
    ))
}

fn metric_oracles() -> Check {
    let cases: [(&[f64], &[bool], f64); 3] = [
        (&[0.9, 0.1], &[true, false], 1.0),
        (&[0.4, 0.4, 0.4, 0.4], &[true, false, false, true], 0.5),
        (&[0.8, 0.6, 0.4], &[true, false, true], 0.5),
    ];
    for (scores, labels, want) in cases {
        let got = auc_roc(scores, labels).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("AUC {scores:?} gave {got}, want {want}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let n = rng.gen_range(2..30);
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..8) as f64 / 8.0).collect();
        let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        labels[0] = true;
        labels[1] = false;
        let (mut wins, mut pairs) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                if labels[i] && !labels[j] {
                    pairs += 1.0;
                    wins += if scores[i] > scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        let got = auc_roc(&scores, &labels).map_err(|e| e.to_string())?;
        ensure((got - wins / pairs).abs() < 1e-12, || {
            format!("AUC {got} vs pair count {}", wins / pairs)
        })?;
    }
    let perfect =
        Metrics::from_scores(&[0.9, 0.2, 0.7, 0.1], &[true, false, true, false], 0.5).map_err(|e| e.to_string())?;
    ensure(
        (perfect.accuracy, perfect.precision, perfect.recall, perfect.f1) == (1.0, 1.0, 1.0, 1.0),
        || format!("perfect predictions gave {perfect:?}"),
    )?;
    let all_pos = Metrics::from_scores(&[0.9; 8], &[true, false, false, false, true, false, false, false], 0.5)
        .map_err(|e| e.to_string())?;
    ensure(
        (all_pos.precision, all_pos.recall, all_pos.f1) == (0.25, 1.0, 0.4),
        || format!("all-positive predictions gave {all_pos:?}"),
    )?;
    Ok("AUC examples and 50 pair-enumeration cases exact; F1 arithmetic exact".into())
}

/// Informational only: the outcome never fails the suite.
fn real_data_smoke() -> Option<Check> {
    let manifest = std::env::var("STRESSGRAPH_SAM40_MANIFEST").ok()?;
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return Some(Err(e.to_string())),
    };
    let out = dir.path().join("real");
    let mut args = vec![
        "train",
        "--manifest",
        manifest.as_str(),
        "--runs",
        "10",
        "--out",
        out.to_str().unwrap(),
    ];
    let layout = std::env::var("STRESSGRAPH_SAM40_LAYOUT").ok();
    if let Some(l) = &layout {
        args.extend(["--layout", l.as_str()]);
    }
    let start = Instant::now();
    Some(cli_ok(&args).and_then(|_| {
        let text = std::fs::read_to_string(out.join("metrics.json")).map_err(|e| e.to_string())?;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        let acc = v["mean"]["accuracy"].as_f64().ok_or("no mean accuracy")?;
        let detail = format!("mean accuracy {acc:.4} in {:.0?}", start.elapsed());
        if (REAL_BAND.0..=REAL_BAND.1).contains(&acc) {
            Ok(detail)
        } else {
            Err(format!("{detail}, outside [{}, {}]", REAL_BAND.0, REAL_BAND.1))
        }
    }))
}

fn main() {
    let checks: [Criterion; 8] = [
        ("gradient correctness", gradient_correctness),
        ("graph metric oracles", graph_oracles),
        ("graph construction contracts", construction_contracts),
        ("gcn permutation equivariance", gcn_equivariance),
        ("metric oracles", metric_oracles),
        ("determinism", determinism),
        ("ablation recoverability", ablation_recoverability),
        ("synthetic learnability", learnability),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    match real_data_smoke() {
        None => println!("SKIP  real-data smoke: STRESSGRAPH_SAM40_MANIFEST not set"),
        Some(Ok(detail)) => println!("INFO  real-data smoke: {detail}"),
        Some(Err(detail)) => println!("INFO  real-data smoke (outside band, not gating): {detail}"),
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
