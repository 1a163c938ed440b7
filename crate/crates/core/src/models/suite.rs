use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{ModelConfig, Network, PreparedTrial};
use crate::error::{Error, Result};
use crate::graph::structural_adjacency;
use crate::nn::{bce_loss, dense, dense_backward, gradcheck, Activation, GradcheckReport, ParamSet, Tensor};
use crate::synth::{generate, SynthSpec};

/// Tolerance for layers that are linear in their parameters.
pub const LINEAR_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteEntry {
    pub name: String,
    pub report: GradcheckReport,
}

/// Finite-difference checks of a linear layer, a toy ST-GCN (4 nodes, T=32)
/// and a toy MLP. `corrupt` names a parameter block whose analytic gradient
/// is inflated by 10% before checking.
pub fn gradcheck_suite(corrupt: Option<&str>, tolerance: f64) -> Result<Vec<SuiteEntry>> {
    let mut matched = false;
    let mut spoil = |grads: &mut ParamSet| {
        if let Some(name) = corrupt {
            if let Some(t) = grads.get_mut(name) {
                t.scale(1.1);
                matched = true;
            }
        }
    };
    let mut entries = Vec::new();

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = Tensor::from_fn(&[3, 5], |_| rng.gen_range(-1.0..1.0));
    let mut params = ParamSet::new();
    params.push("linear.weight", Tensor::from_fn(&[5, 2], |_| rng.gen_range(-1.0..1.0)));
    params.push("linear.bias", Tensor::from_fn(&[2], |_| rng.gen_range(-1.0..1.0)));
    let probe = Tensor::from_fn(&[3, 2], |_| rng.gen_range(-1.0..1.0));
    // L = <probe, xW + b>, so dL/dout = probe.
    let linear = |p: &ParamSet| -> f64 {
        let out = dense(&x, p.block(0), p.block(1), Activation::None).expect("shapes fixed");
        out.data().iter().zip(probe.data()).map(|(a, b)| a * b).sum()
    };
    let out = dense(&x, params.block(0), params.block(1), Activation::None)?;
    let d = dense_backward(&x, params.block(0), params.block(1), &out, &probe, Activation::None)?;
    let mut analytic = params.zeros_like();
    *analytic.block_mut(0) = d.weight;
    *analytic.block_mut(1) = d.bias;
    spoil(&mut analytic);
    entries.push(SuiteEntry {
        name: "linear".into(),
        report: gradcheck(&params, &analytic, linear, LINEAR_TOLERANCE),
    });

    let spec = SynthSpec {
        n_relaxed: 0,
        n_stressed: 1,
        channels: 4,
        samples: 32,
        signature_channels: vec![1, 2],
        seed: 5,
        ..SynthSpec::default()
    };
    let ds = generate(&spec)?;
    for config in [
        ModelConfig {
            filters: 4,
            gcn_features: 4,
            kernel_size: 5,
            hidden_width: 4,
            ..ModelConfig::stgcn()
        },
        ModelConfig {
            hidden_width: 6,
            ..ModelConfig::mlp()
        },
    ] {
        let config = config.with_seed(9);
        let structural = structural_adjacency(&ds.layout, &config.graph)?;
        let trial = PreparedTrial::from_trial(&ds.trials[0], &structural, &config.graph)?;
        let mut net = Network::init(&config, 4, 32)?;
        // Small positive biases keep ReLUs away from their kinks.
        for block in net.params_mut().blocks_mut() {
            if block.name.ends_with("bias") {
                block.tensor.data_mut().iter_mut().for_each(|v| *v = 0.05);
            }
        }
        let dropout_seed = 21;
        let loss = |p: f64| bce_loss(&[p], &[trial.target]).expect("one sample");
        let (_, mut analytic) = net.forward_backward(&trial, dropout_seed, |p| loss(p).1[0])?;
        spoil(&mut analytic);
        let f = |p: &ParamSet| -> f64 {
            let mut probe = net.clone();
            *probe.params_mut() = p.clone();
            loss(probe.training_forward(&trial, dropout_seed).expect("same shapes")).0
        };
        entries.push(SuiteEntry {
            name: format!("{:?}", config.kind).to_lowercase(),
            report: gradcheck(net.params(), &analytic, f, tolerance),
        });
    }
    if let (Some(name), false) = (corrupt, matched) {
        return Err(Error::Config(format!("no parameter block named `{name}`")));
    }
    Ok(entries)
}
