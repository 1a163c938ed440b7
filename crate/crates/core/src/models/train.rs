use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{prepare, Metrics, ModelConfig, Network, PreparedTrial};
use crate::data::{stratified_holdout, Dataset};
use crate::error::{Error, Result};
use crate::exec::{derive_seed as mix, Execution};
use crate::nn::{bce_loss_weighted, AdamConfig, AdamState, ParamSet};

const SHUFFLE_STREAM: u64 = 0x5348_5546;
const DROPOUT_STREAM: u64 = 0x4452_4f50;
const VAL_STREAM: u64 = 0x5641_4c00;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Share of the training data held out for per-epoch validation.
    pub val_fraction: f64,
    /// Share held out for testing by [`run_experiment`].
    pub test_fraction: f64,
    /// Drives the splits, the epoch shuffles and dropout masks.
    pub seed: u64,
    /// Weight the loss by inverse class frequency.
    pub class_weighting: bool,
    pub threshold: f64,
    pub execution: Execution,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 8,
            learning_rate: 1e-3,
            val_fraction: 0.1,
            test_fraction: 0.2,
            seed: 0,
            class_weighting: false,
            threshold: 0.5,
            execution: Execution::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        for (name, f) in [
            ("val_fraction", self.val_fraction),
            ("test_fraction", self.test_fraction),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0,1), got {f}")));
            }
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!(
                "threshold must lie in (0,1), got {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

/// Predictions and metrics over a set of trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub metrics: Metrics,
    pub loss: f64,
    pub ids: Vec<String>,
    pub scores: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub network: Network,
    pub history: Vec<EpochRecord>,
    /// Mean loss of every mini-batch, in step order.
    pub step_losses: Vec<f64>,
    pub steps: u64,
    /// `None` when the training set was too small for a validation carve-out.
    pub validation: Option<Evaluation>,
}

/// Train on `dataset` after carving off a stratified validation set.
pub fn train(model: &ModelConfig, dataset: &Dataset, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    model.validate()?;
    let counts = dataset.label_counts();
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::InsufficientData(format!(
            "training needs both labels, got {} relaxed and {} stressed",
            counts[0], counts[1]
        )));
    }
    let (fit, val) = match stratified_holdout(dataset, config.val_fraction, mix(config.seed, VAL_STREAM)) {
        Ok((rest, val)) => (rest, Some(val)),
        Err(Error::InsufficientData(_)) => (dataset.clone(), None),
        Err(e) => return Err(e),
    };
    let fit = prepare(&fit, &model.graph, config.execution)?;
    let val = match val {
        Some(v) => Some(prepare(&v, &model.graph, config.execution)?),
        None => None,
    };
    train_prepared(model, &fit, val.as_deref(), config)
}

/// Training loop over already prepared trials.
pub fn train_prepared(
    model: &ModelConfig,
    train: &[PreparedTrial],
    val: Option<&[PreparedTrial]>,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    let first = train
        .first()
        .ok_or_else(|| Error::InsufficientData("empty training set".into()))?;
    if let Some(bad) = train
        .iter()
        .chain(val.unwrap_or(&[]))
        .find(|t| t.channels != first.channels || (model.kind == super::ModelKind::Mlp && t.samples != first.samples))
    {
        return Err(Error::Shape(format!(
            "trial `{}` is {}x{}, expected {}x{}",
            bad.id, bad.channels, bad.samples, first.channels, first.samples
        )));
    }
    let mut network = Network::init(model, first.channels, first.samples)?;
    let mut adam = AdamState::new(
        network.params(),
        AdamConfig {
            learning_rate: config.learning_rate,
            ..AdamConfig::default()
        },
    );
    let weights = class_weights(train, config.class_weighting);
    let run_seed = mix(config.seed, model.seed);

    let mut history = Vec::with_capacity(config.epochs);
    let mut step_losses = Vec::new();
    let mut validation = None;
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 0..config.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(run_seed ^ SHUFFLE_STREAM, epoch as u64));
        order.sort_unstable();
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let dropout_base = mix(mix(run_seed ^ DROPOUT_STREAM, epoch as u64), b as u64);
            let step = batch_step(&network, train, batch, weights, dropout_base, config.execution)?;
            if !step.loss.is_finite() {
                return Err(Error::Divergence(format!(
                    "non-finite loss at epoch {epoch}, batch {b}"
                )));
            }
            adam.update(network.params_mut(), &step.grads)?;
            step_losses.push(step.loss);
            loss_sum += step.loss * batch.len() as f64;
            correct += batch
                .iter()
                .zip(&step.probs)
                .filter(|(&i, &p)| (p >= config.threshold) == (train[i].target > 0.5))
                .count();
        }

        let val_eval = match val {
            Some(v) if !v.is_empty() => Some(evaluate_prepared(&network, v, config.threshold, config.execution)?),
            _ => None,
        };
        history.push(EpochRecord {
            epoch: epoch + 1,
            train_loss: loss_sum / train.len() as f64,
            train_accuracy: correct as f64 / train.len() as f64,
            val_loss: val_eval.as_ref().map(|e| e.loss),
            val_accuracy: val_eval.as_ref().map(|e| e.metrics.accuracy),
        });
        validation = val_eval;
    }
    Ok(TrainOutcome {
        network,
        history,
        step_losses,
        steps: adam.step,
        validation,
    })
}

fn class_weights(train: &[PreparedTrial], enabled: bool) -> [f64; 2] {
    if !enabled {
        return [1.0, 1.0];
    }
    let pos = train.iter().filter(|t| t.target > 0.5).count();
    let neg = train.len() - pos;
    let n = train.len() as f64;
    let w = |c: usize| if c == 0 { 1.0 } else { n / (2.0 * c as f64) };
    [w(neg), w(pos)]
}

struct BatchStep {
    loss: f64,
    probs: Vec<f64>,
    grads: ParamSet,
}

fn sample_loss(p: f64, y: f64, w: f64, m: usize) -> (f64, f64) {
    let (loss, grad) = bce_loss_weighted(&[p], &[y], Some(&[w])).expect("single-sample shapes agree");
    (loss / m as f64, grad[0] / m as f64)
}

/// Mean-loss gradient of one mini-batch.
///
/// Per-sample gradients are computed a pool's width at a time and summed in
/// batch order, so the result is identical for every execution mode.
fn batch_step(
    network: &Network,
    train: &[PreparedTrial],
    batch: &[usize],
    weights: [f64; 2],
    dropout_base: u64,
    exec: Execution,
) -> Result<BatchStep> {
    let m = batch.len();
    let mut grads = network.params().zeros_like();
    let mut probs = Vec::with_capacity(m);
    let mut loss = 0.0;
    let width = exec.width().max(1);
    for (c, chunk) in batch.chunks(width).enumerate() {
        let results = exec.map(chunk, |j, &i| {
            let x = &train[i];
            let w = weights[(x.target > 0.5) as usize];
            let seed = mix(dropout_base, (c * width + j) as u64);
            network.forward_backward(x, seed, |p| sample_loss(p, x.target, w, m).1)
        });
        for (&i, r) in chunk.iter().zip(results) {
            let (p, g) = r?;
            let x = &train[i];
            loss += sample_loss(p, x.target, weights[(x.target > 0.5) as usize], m).0;
            probs.push(p);
            grads.add_assign(&g);
        }
    }
    Ok(BatchStep { loss, probs, grads })
}

/// Inference over prepared trials with hard predictions at `threshold`.
pub fn evaluate_prepared(
    network: &Network,
    trials: &[PreparedTrial],
    threshold: f64,
    exec: Execution,
) -> Result<Evaluation> {
    if trials.is_empty() {
        return Err(Error::InsufficientData("evaluation on an empty set".into()));
    }
    let scores = exec
        .map(trials, |_, t| network.predict(t))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let targets: Vec<f64> = trials.iter().map(|t| t.target).collect();
    let labels: Vec<bool> = targets.iter().map(|&y| y > 0.5).collect();
    let (loss, _) = bce_loss_weighted(&scores, &targets, None)?;
    Ok(Evaluation {
        metrics: Metrics::from_scores(&scores, &labels, threshold)?,
        loss,
        ids: trials.iter().map(|t| t.id.clone()).collect(),
        scores,
    })
}

pub fn evaluate(network: &Network, dataset: &Dataset, threshold: f64, exec: Execution) -> Result<Evaluation> {
    let prepared = prepare(dataset, &network.config().graph, exec)?;
    evaluate_prepared(network, &prepared, threshold, exec)
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub outcome: TrainOutcome,
    pub test: Evaluation,
}

/// Hold out a stratified test set, train on the rest and score the test set.
pub fn run_experiment(model: &ModelConfig, dataset: &Dataset, config: &TrainConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let (rest, test) = stratified_holdout(dataset, config.test_fraction, config.seed)?;
    let outcome = train(model, &rest, config)?;
    let test = evaluate(&outcome.network, &test, config.threshold, config.execution)?;
    Ok(ExperimentResult { outcome, test })
}

pub fn history_to_csv(history: &[EpochRecord]) -> String {
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let mut out = String::from("epoch,train_loss,train_acc,val_loss,val_acc\n");
    for r in history {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.epoch,
            r.train_loss,
            r.train_accuracy,
            opt(r.val_loss),
            opt(r.val_accuracy)
        ));
    }
    out
}
