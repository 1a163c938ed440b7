use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use stressgraph::ablation::{run_ablation, AblationConfig, Protocol};
use stressgraph::data::{load_dataset, load_trial_csv, write_dataset, Dataset, ElectrodeLayout, Label};
use stressgraph::graph::{fused_adjacency, graph_metrics, mean_metrics, structural_adjacency, GraphConfig};
use stressgraph::models::{
    gradcheck_suite, history_to_csv, run_experiment, Checkpoint, Metrics, MetricsSummary, ModelConfig, ModelKind,
    TrainConfig,
};
use stressgraph::report::{
    ablation_csv, ablation_figure, ablation_json, parse_topomap_csv, topomap_csv, topomap_svg, unit_accuracies,
};
use stressgraph::synth::{generate_with, SynthSpec};
use stressgraph::{Error, Execution};

use crate::config::{set, ConfigFile};
use crate::{
    AblateArgs, Command, GradcheckArgs, GraphArgs, GraphFlags, ModelArg, ModelFlags, RepeatMode, SweepArgs, SynthArgs,
    TopomapArgs, TrainArgs, TrainFlags,
};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    /// The command ran but its check did not pass.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_validation() => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Failed(msg) => f.write_str(msg),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

pub fn run(command: Command) -> CliResult {
    match command {
        Command::Synth(a) => synth(a),
        Command::Graph(a) => graph(a),
        Command::Sweep(a) => sweep(a),
        Command::Train(a) => train(a),
        Command::Ablate(a) => ablate(a),
        Command::Gradcheck(a) => gradcheck(a),
        Command::Topomap(a) => topomap(a),
    }
}

/// Missing inputs are usage errors, not runtime failures.
fn input(path: &Path) -> CliResult<&Path> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::Config(format!("input file {} does not exist", path.display())).into())
    }
}

fn layout(path: Option<&PathBuf>) -> CliResult<ElectrodeLayout> {
    Ok(match path {
        Some(p) => ElectrodeLayout::load(input(p)?)?,
        None => ElectrodeLayout::default_32(),
    })
}

fn out_dir(path: &Path) -> CliResult<PathBuf> {
    std::fs::create_dir_all(path)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}

fn write(dir: &Path, name: &str, contents: &str) -> CliResult {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| {
        CliError::Core(Error::Io {
            context: format!("writing {}", path.display()),
            source: e,
        })
    })
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

fn graph_config(file: &ConfigFile, flags: &GraphFlags) -> CliResult<GraphConfig> {
    let mut g = file.layer("graph", GraphConfig::default())?;
    set(&mut g.k, flags.k);
    set(&mut g.tau, flags.tau);
    set(&mut g.epsilon, flags.epsilon);
    Ok(g)
}

fn model_config(file: &ConfigFile, flags: &ModelFlags, graph: GraphConfig) -> CliResult<ModelConfig> {
    let from_file = file.layer("model", ModelConfig::stgcn())?.kind;
    let kind = match flags.model {
        Some(ModelArg::Stgcn) => ModelKind::Stgcn,
        Some(ModelArg::Mlp) => ModelKind::Mlp,
        None => from_file,
    };
    let mut m = file.layer("model", ModelConfig::for_kind(kind))?;
    m.kind = kind;
    set(&mut m.filters, flags.filters);
    set(&mut m.gcn_features, flags.gcn_features);
    set(&mut m.kernel_size, flags.kernel_size);
    set(&mut m.hidden_width, flags.hidden_width);
    set(&mut m.dropout_rate, flags.dropout);
    m.graph = graph;
    m.validate()?;
    Ok(m)
}

fn train_config(file: &ConfigFile, flags: &TrainFlags) -> CliResult<TrainConfig> {
    let mut t = file.layer("train", TrainConfig::default())?;
    set(&mut t.epochs, flags.epochs);
    set(&mut t.batch_size, flags.batch_size);
    set(&mut t.learning_rate, flags.lr);
    set(&mut t.val_fraction, flags.val_fraction);
    set(&mut t.test_fraction, flags.test_fraction);
    set(&mut t.threshold, flags.threshold);
    if flags.class_weighting {
        t.class_weighting = true;
    }
    if flags.sequential {
        t.execution = Execution::Sequential;
    }
    t.validate()?;
    Ok(t)
}

fn load(data: &crate::DataArgs) -> CliResult<Dataset> {
    let layout = layout(data.layout.as_ref())?;
    Ok(load_dataset(input(&data.manifest)?, &layout)?)
}

fn synth(a: SynthArgs) -> CliResult {
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let mut spec = file.layer("synth", SynthSpec::default())?;
    set(&mut spec.n_relaxed, a.n_relaxed);
    set(&mut spec.n_stressed, a.n_stressed);
    set(&mut spec.channels, a.channels);
    set(&mut spec.samples, a.samples);
    set(&mut spec.sample_rate, a.sample_rate);
    set(&mut spec.segments, a.segments);
    set(&mut spec.signature_channels, a.signature_channels);
    set(&mut spec.signature_segments, a.signature_segments);
    set(&mut spec.signature_amplitude, a.amplitude);
    set(&mut spec.signature_freq, a.freq);
    set(&mut spec.shared_noise_gain, a.gain);
    set(&mut spec.seed, a.seed);
    spec.validate()?;
    let ds = generate_with(&spec, Execution::default())?;
    let out = out_dir(&a.common.out)?;
    let manifest = write_dataset(&out, &ds)?;
    write(&out, "layout.csv", &ds.layout.to_csv())?;
    write(&out, "synth_spec.json", &to_json(&spec)?)?;
    let [r, s] = ds.label_counts();
    println!(
        "wrote {} trials ({r} relaxed, {s} stressed) to {}",
        ds.len(),
        manifest.display()
    );
    Ok(())
}

fn graph(a: GraphArgs) -> CliResult {
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let g = graph_config(&file, &a.graph)?;
    let layout = layout(a.layout.as_ref())?;
    g.validate(layout.len())?;
    let structural = structural_adjacency(&layout, &g)?;
    let out;
    if let Some(path) = &a.trial {
        let id = path
            .file_stem()
            .map_or("trial".into(), |s| s.to_string_lossy().into_owned());
        let trial = load_trial_csv(input(path)?, &id, Label::Relaxed)?;
        if trial.channels() != layout.len() {
            return Err(Error::Shape(format!(
                "trial has {} channels, layout has {}",
                trial.channels(),
                layout.len()
            ))
            .into());
        }
        let fused = fused_adjacency(&trial, &structural, &g)?;
        let metrics = graph_metrics(&fused)?;
        out = out_dir(&a.common.out)?;
        write(&out, "adjacency.csv", &fused.to_csv())?;
        write(&out, "metrics.json", &to_json(&metrics)?)?;
        println!(
            "{} edges; metrics {}",
            fused.edge_count(),
            serde_json::to_string(&metrics).map_err(Error::from)?
        );
    } else {
        let manifest = a.manifest.as_ref().expect("clap requires trial or manifest");
        let ds = load_dataset(input(manifest)?, &layout)?;
        let all = Execution::default()
            .map(&ds.trials, |_, t| {
                fused_adjacency(t, &structural, &g).and_then(|a| graph_metrics(&a))
            })
            .into_iter()
            .collect::<stressgraph::Result<Vec<_>>>()?;
        let mean = mean_metrics(&all).ok_or_else(|| Error::InsufficientData("empty dataset".into()))?;
        out = out_dir(&a.common.out)?;
        write(&out, "structural.csv", &structural.to_csv())?;
        write(&out, "metrics.json", &to_json(&mean)?)?;
        println!(
            "mean over {} trials: {}",
            all.len(),
            serde_json::to_string(&mean).map_err(Error::from)?
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct RunRecord {
    run: usize,
    seed: u64,
    split_seed: u64,
    steps: u64,
    final_train_loss: f64,
    final_train_accuracy: f64,
    validation: Option<Metrics>,
    test: Metrics,
}

#[derive(Serialize)]
struct TrainReport<'a> {
    model: &'a ModelConfig,
    train: &'a TrainConfig,
    repeat: &'a str,
    runs: Vec<RunRecord>,
    mean: Metrics,
    std: Metrics,
}

fn train(a: TrainArgs) -> CliResult {
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let g = graph_config(&file, &a.graph)?;
    let model = model_config(&file, &a.model, g)?;
    let tcfg = train_config(&file, &a.train)?;
    if a.runs == 0 {
        return Err(Error::Config("--runs must be at least 1".into()).into());
    }
    let ds = load(&a.data)?;
    g.validate(ds.channels())?;
    let out = out_dir(&a.common.out)?;
    let mut runs = Vec::with_capacity(a.runs);
    for r in 0..a.runs {
        let seed = a.seed.wrapping_add(r as u64);
        let split_seed = match a.repeat {
            RepeatMode::Resplit => seed,
            RepeatMode::Reinit => a.seed,
        };
        let result = run_experiment(
            &model.with_seed(seed),
            &ds,
            &TrainConfig {
                seed: split_seed,
                ..tcfg
            },
        )?;
        let tag = format!("run{:02}", r + 1);
        write(
            &out,
            &format!("history_{tag}.csv"),
            &history_to_csv(&result.outcome.history),
        )?;
        let samples = ds.samples().unwrap_or(0);
        Checkpoint::new(&result.outcome.network, ds.channels(), samples)
            .save(&out.join(format!("checkpoint_{tag}.json")))?;
        let last = result.outcome.history.last().expect("at least one epoch");
        let m = result.test.metrics;
        println!(
            "{tag} seed {seed}: test accuracy {:.4} f1 {:.4} auc {}",
            m.accuracy,
            m.f1,
            m.auc_roc.map_or("n/a".into(), |v| format!("{v:.4}"))
        );
        runs.push(RunRecord {
            run: r + 1,
            seed,
            split_seed,
            steps: result.outcome.steps,
            final_train_loss: last.train_loss,
            final_train_accuracy: last.train_accuracy,
            validation: result.outcome.validation.map(|v| v.metrics),
            test: m,
        });
    }
    let tests: Vec<Metrics> = runs.iter().map(|r| r.test).collect();
    let summary = MetricsSummary::from_runs(&tests).expect("runs is non-empty");
    let report = TrainReport {
        model: &model,
        train: &tcfg,
        repeat: match a.repeat {
            RepeatMode::Resplit => "resplit",
            RepeatMode::Reinit => "reinit",
        },
        runs,
        mean: summary.mean,
        std: summary.std,
    };
    write(&out, "metrics.json", &to_json(&report)?)?;
    println!(
        "mean accuracy {:.4} +/- {:.4} over {} run(s)",
        summary.mean.accuracy, summary.std.accuracy, summary.runs
    );
    Ok(())
}

#[derive(Serialize)]
struct SweepCell {
    k: usize,
    tau: f64,
    mean: Metrics,
    std: Metrics,
}

fn sweep(a: SweepArgs) -> CliResult {
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let base = graph_config(&file, &a.graph)?;
    let model = model_config(&file, &a.model, base)?;
    let tcfg = train_config(&file, &a.train)?;
    if a.runs == 0 || a.ks.is_empty() || a.taus.is_empty() {
        return Err(Error::Config("sweep needs at least one k, one tau and one run".into()).into());
    }
    let ds = load(&a.data)?;
    for &k in &a.ks {
        for &tau in &a.taus {
            GraphConfig { k, tau, ..base }.validate(ds.channels())?;
        }
    }
    let out = out_dir(&a.common.out)?;
    let mut cells = Vec::new();
    let mut csv = String::from("k,tau,accuracy,precision,recall,f1,auc,balanced_accuracy\n");
    for &k in &a.ks {
        for &tau in &a.taus {
            let m = ModelConfig {
                graph: GraphConfig { k, tau, ..base },
                ..model
            };
            let tests = (0..a.runs)
                .map(|r| {
                    let seed = a.seed.wrapping_add(r as u64);
                    run_experiment(&m.with_seed(seed), &ds, &TrainConfig { seed, ..tcfg }).map(|x| x.test.metrics)
                })
                .collect::<stressgraph::Result<Vec<_>>>()?;
            let s = MetricsSummary::from_runs(&tests).expect("runs is non-empty");
            let auc = s.mean.auc_roc.map_or(String::new(), |v| format!("{v:.6}"));
            csv.push_str(&format!(
                "{k},{tau},{:.6},{:.6},{:.6},{:.6},{auc},{:.6}\n",
                s.mean.accuracy, s.mean.precision, s.mean.recall, s.mean.f1, s.mean.balanced_accuracy
            ));
            println!("k={k} tau={tau}: accuracy {:.4}", s.mean.accuracy);
            cells.push(SweepCell {
                k,
                tau,
                mean: s.mean,
                std: s.std,
            });
        }
    }
    write(&out, "sweep.csv", &csv)?;
    write(&out, "sweep.json", &to_json(&cells)?)?;
    Ok(())
}

fn ablate(a: AblateArgs) -> CliResult {
    let protocol: Protocol = a.protocol.parse()?;
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let g = graph_config(&file, &a.graph)?;
    let model = model_config(&file, &a.model, g)?;
    let tcfg = train_config(&file, &a.train)?;
    let mut acfg = file.layer("ablation", AblationConfig::default())?;
    set(&mut acfg.segments, a.segments);
    if a.train.sequential {
        acfg.execution = Execution::Sequential;
    }
    let ds = load(&a.data)?;
    g.validate(ds.channels())?;
    let report = run_ablation(protocol, &ds, &model, &tcfg, &a.seeds, &acfg)?;
    let out = out_dir(&a.common.out)?;
    write(&out, "ablation.csv", &ablation_csv(&report))?;
    write(&out, "ablation.json", &ablation_json(&report)?)?;
    write(&out, "figure.svg", &ablation_figure(&report, &ds.layout)?)?;
    if matches!(protocol, Protocol::ChannelOnly | Protocol::ChannelRemoved) {
        write(&out, "topomap.csv", &topomap_csv(&unit_accuracies(&report)))?;
    }
    println!("baseline accuracy {:.4}", report.baseline.accuracy);
    for row in &report.rows {
        match (&row.metrics, &row.error) {
            (Some(m), _) => println!(
                "{:<20} accuracy {:.4}  delta {:+.4}",
                row.unit,
                m.accuracy,
                row.delta.unwrap_or(0.0)
            ),
            (None, Some(e)) => println!("{:<20} error: {e}", row.unit),
            (None, None) => {}
        }
    }
    Ok(())
}

fn gradcheck(a: GradcheckArgs) -> CliResult {
    if a.size != "toy" {
        return Err(Error::Config(format!("unknown gradcheck size `{}` (only `toy`)", a.size)).into());
    }
    if a.tolerance.is_nan() || a.tolerance <= 0.0 {
        return Err(Error::Config("tolerance must be positive".into()).into());
    }
    let entries = gradcheck_suite(a.corrupt.as_deref(), a.tolerance)?;
    for e in &entries {
        for b in &e.report.blocks {
            let ok = b.max_rel_error < e.report.tolerance;
            println!(
                "{:<6} {:<16} max_rel_error {:.3e}  {}",
                e.name,
                b.name,
                b.max_rel_error,
                if ok { "ok" } else { "FAIL" }
            );
        }
    }
    if let Some(dir) = &a.out {
        let out = out_dir(dir)?;
        write(&out, "gradcheck.json", &to_json(&entries)?)?;
    }
    if entries.iter().all(|e| e.report.passed) {
        println!("gradient check passed");
        Ok(())
    } else {
        Err(CliError::Failed("gradient check failed".into()))
    }
}

fn topomap(a: TopomapArgs) -> CliResult {
    let layout = layout(a.layout.as_ref())?;
    let text = std::fs::read_to_string(input(&a.input)?)
        .map_err(|e| CliError::Core(Error::Config(format!("reading {}: {e}", a.input.display()))))?;
    let values = parse_topomap_csv(&text)?;
    let svg = topomap_svg(&layout, &values, &a.title)?;
    let out = out_dir(&a.out)?;
    write(&out, "topomap.svg", &svg)?;
    Ok(())
}
