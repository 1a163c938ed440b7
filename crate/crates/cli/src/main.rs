//! `stressgraph` command-line tool.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "stressgraph",
    version,
    about = "Graph neural networks for EEG stress classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset (trial CSVs, manifest and layout).
    Synth(SynthArgs),
    /// Build the fused graph of one trial, or mean graph metrics of a dataset.
    Graph(GraphArgs),
    /// Train and test over a grid of k and tau values.
    Sweep(SweepArgs),
    /// Train a classifier and report test metrics over one or more runs.
    Train(TrainArgs),
    /// Run a channel, region or segment ablation protocol.
    Ablate(AblateArgs),
    /// Check analytic gradients against finite differences.
    Gradcheck(GradcheckArgs),
    /// Render a scalp map from a `channel,value` CSV.
    Topomap(TopomapArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output directory; nothing is written outside it.
    #[arg(long)]
    out: PathBuf,
    /// JSON config file with optional graph/model/train/synth/ablation sections.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct DataArgs {
    /// Dataset manifest (JSON list of id, file, label).
    #[arg(long)]
    manifest: PathBuf,
    /// Electrode layout CSV (`name,x,y`); defaults to the bundled 32-channel montage.
    #[arg(long)]
    layout: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct GraphFlags {
    /// Structural neighbours per electrode.
    #[arg(long)]
    k: Option<usize>,
    /// Correlation threshold of the functional graph.
    #[arg(long)]
    tau: Option<f64>,
    /// Distance offset in structural weights.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Stgcn,
    Mlp,
}

#[derive(Args, Debug, Clone, Default)]
struct ModelFlags {
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long)]
    filters: Option<usize>,
    #[arg(long)]
    gcn_features: Option<usize>,
    #[arg(long)]
    kernel_size: Option<usize>,
    #[arg(long)]
    hidden_width: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
struct TrainFlags {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    val_fraction: Option<f64>,
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Weight the loss by inverse class frequency.
    #[arg(long)]
    class_weighting: bool,
    /// Run single-threaded.
    #[arg(long)]
    sequential: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum RepeatMode {
    /// Each run draws a new split and a new initialization.
    Resplit,
    /// Runs share the split of the first seed and differ only in initialization and shuffling.
    Reinit,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n_relaxed: Option<usize>,
    #[arg(long)]
    n_stressed: Option<usize>,
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    sample_rate: Option<f64>,
    #[arg(long)]
    segments: Option<usize>,
    /// Comma-separated channel indices carrying the signature.
    #[arg(long, value_delimiter = ',')]
    signature_channels: Option<Vec<usize>>,
    /// Comma-separated segment indices carrying the signature (all when omitted).
    #[arg(long, value_delimiter = ',')]
    signature_segments: Option<Vec<usize>>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    freq: Option<f64>,
    #[arg(long)]
    gain: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct GraphArgs {
    #[command(flatten)]
    common: Common,
    /// Single trial CSV (one row per channel).
    #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
    trial: Option<PathBuf>,
    /// Dataset manifest; writes mean metrics over all trials instead.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    layout: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphFlags,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    ks: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.4,0.5,0.6")]
    taus: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    graph: GraphFlags,
    #[command(flatten)]
    model: ModelFlags,
    #[command(flatten)]
    train: TrainFlags,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// First seed; run r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = RepeatMode::Resplit)]
    repeat: RepeatMode,
    #[command(flatten)]
    graph: GraphFlags,
    #[command(flatten)]
    model: ModelFlags,
    #[command(flatten)]
    train: TrainFlags,
}

#[derive(Args, Debug)]
struct AblateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    /// channel_only, channel_removed, region_only, region_removed, segment_only or segment_removed.
    #[arg(long)]
    protocol: String,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    /// Number of equal temporal segments.
    #[arg(long)]
    segments: Option<usize>,
    #[command(flatten)]
    graph: GraphFlags,
    #[command(flatten)]
    model: ModelFlags,
    #[command(flatten)]
    train: TrainFlags,
}

#[derive(Args, Debug)]
struct GradcheckArgs {
    /// Optional directory for a JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Problem size; only `toy` is available.
    #[arg(long, default_value = "toy")]
    size: String,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    /// Inflate the analytic gradient of this parameter block by 10%.
    #[arg(long)]
    corrupt: Option<String>,
}

#[derive(Args, Debug)]
struct TopomapArgs {
    /// Output directory for `topomap.svg`.
    #[arg(long)]
    out: PathBuf,
    /// `channel,value` CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    layout: Option<PathBuf>,
    #[arg(long, default_value = "")]
    title: String,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
