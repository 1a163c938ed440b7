//! ST-GCN and MLP classifiers, the training loop and evaluation metrics.

mod checkpoint;
mod metrics;
mod mlp;
mod stgcn;
mod suite;
mod train;

use serde::{Deserialize, Serialize};

use crate::data::{zscore_normalize, Dataset, Trial};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graph::{fused_adjacency, renormalize, structural_adjacency, Adjacency, GraphConfig};
use crate::nn::ParamSet;

pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use metrics::{auc_roc, Metrics, MetricsSummary};
pub use mlp::Mlp;
pub use stgcn::Stgcn;
pub use suite::{gradcheck_suite, SuiteEntry, LINEAR_TOLERANCE};
pub use train::{
    evaluate, evaluate_prepared, history_to_csv, run_experiment, train, train_prepared, EpochRecord, Evaluation,
    ExperimentResult, TrainConfig, TrainOutcome,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Stgcn,
    Mlp,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stgcn" => Ok(ModelKind::Stgcn),
            "mlp" => Ok(ModelKind::Mlp),
            other => Err(Error::Config(format!(
                "unknown model `{other}` (expected stgcn or mlp)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Temporal convolution filters (F).
    pub filters: usize,
    /// Graph convolution output width (F').
    pub gcn_features: usize,
    pub kernel_size: usize,
    pub hidden_width: usize,
    /// Only used by the MLP.
    pub dropout_rate: f64,
    pub graph: GraphConfig,
    pub seed: u64,
}

impl ModelConfig {
    pub fn stgcn() -> Self {
        Self {
            kind: ModelKind::Stgcn,
            filters: 16,
            gcn_features: 32,
            kernel_size: 7,
            hidden_width: 32,
            dropout_rate: 0.0,
            graph: GraphConfig::default(),
            seed: 0,
        }
    }

    pub fn mlp() -> Self {
        Self {
            kind: ModelKind::Mlp,
            hidden_width: 64,
            dropout_rate: 0.3,
            ..Self::stgcn()
        }
    }

    pub fn for_kind(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Stgcn => Self::stgcn(),
            ModelKind::Mlp => Self::mlp(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernel_size.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "kernel_size must be odd, got {}",
                self.kernel_size
            )));
        }
        for (name, v) in [
            ("filters", self.filters),
            ("gcn_features", self.gcn_features),
            ("kernel_size", self.kernel_size),
            ("hidden_width", self.hidden_width),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Config(format!(
                "dropout_rate must lie in [0,1), got {}",
                self.dropout_rate
            )));
        }
        Ok(())
    }
}

/// A trial ready for the network: z-scored signal plus its propagation matrix.
#[derive(Clone, Debug)]
pub struct PreparedTrial {
    pub id: String,
    pub channels: usize,
    pub samples: usize,
    pub signal: Vec<f64>,
    pub a_hat: Adjacency,
    pub target: f64,
}

impl PreparedTrial {
    pub fn from_trial(trial: &Trial, structural: &Adjacency, graph: &GraphConfig) -> Result<Self> {
        let normalized = zscore_normalize(trial);
        let a_hat = renormalize(&fused_adjacency(&normalized, structural, graph)?)?;
        Ok(Self {
            id: trial.id.clone(),
            channels: trial.channels(),
            samples: trial.samples(),
            signal: normalized.data().to_vec(),
            a_hat,
            target: trial.label.as_f64(),
        })
    }
}

/// Normalize every trial and build its graph.
pub fn prepare(dataset: &Dataset, graph: &GraphConfig, exec: Execution) -> Result<Vec<PreparedTrial>> {
    let structural = structural_adjacency(&dataset.layout, graph)?;
    exec.map(&dataset.trials, |_, t| PreparedTrial::from_trial(t, &structural, graph))
        .into_iter()
        .collect()
}

/// Either classifier behind one interface.
#[derive(Clone, Debug, PartialEq)]
pub enum Network {
    Stgcn(Stgcn),
    Mlp(Mlp),
}

impl Network {
    /// Fresh network with seeded Glorot weights and zero biases.
    pub fn init(config: &ModelConfig, channels: usize, samples: usize) -> Result<Self> {
        config.validate()?;
        Ok(match config.kind {
            ModelKind::Stgcn => Network::Stgcn(Stgcn::init(*config)),
            ModelKind::Mlp => Network::Mlp(Mlp::init(*config, channels, samples)),
        })
    }

    pub fn config(&self) -> &ModelConfig {
        match self {
            Network::Stgcn(m) => &m.config,
            Network::Mlp(m) => &m.config,
        }
    }

    pub fn params(&self) -> &ParamSet {
        match self {
            Network::Stgcn(m) => &m.params,
            Network::Mlp(m) => &m.params,
        }
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        match self {
            Network::Stgcn(m) => &mut m.params,
            Network::Mlp(m) => &mut m.params,
        }
    }

    /// Inference-mode probability of the stressed class.
    pub fn predict(&self, x: &PreparedTrial) -> Result<f64> {
        match self {
            Network::Stgcn(m) => m.forward(&x.signal, x.channels, x.samples, &x.a_hat),
            Network::Mlp(m) => m.forward(&x.signal, x.channels, x.samples, false, 0),
        }
    }

    /// Training-mode probability (dropout active, drawn from `dropout_seed`).
    pub fn training_forward(&self, x: &PreparedTrial, dropout_seed: u64) -> Result<f64> {
        match self {
            Network::Stgcn(m) => m.forward(&x.signal, x.channels, x.samples, &x.a_hat),
            Network::Mlp(m) => m.forward(&x.signal, x.channels, x.samples, true, dropout_seed),
        }
    }

    /// Training-mode forward and backward pass for one trial.
    ///
    /// `upstream` maps the predicted probability to `dLoss/dp`. Returns the
    /// probability and the parameter gradients.
    pub fn forward_backward(
        &self,
        x: &PreparedTrial,
        dropout_seed: u64,
        upstream: impl FnOnce(f64) -> f64,
    ) -> Result<(f64, ParamSet)> {
        match self {
            Network::Stgcn(m) => m.forward_backward(&x.signal, x.channels, x.samples, &x.a_hat, upstream),
            Network::Mlp(m) => m.forward_backward(&x.signal, x.channels, x.samples, dropout_seed, upstream),
        }
    }
}
