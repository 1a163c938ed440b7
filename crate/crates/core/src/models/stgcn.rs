//! Temporal convolution -> time pooling -> graph convolution -> node pooling
//! -> ReLU dense -> sigmoid output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ModelConfig;
use crate::error::{Error, Result};
use crate::graph::Adjacency;
use crate::nn::{
    conv_pool_backward, conv_pool_forward, dense, dense_backward, gcn_apply, gcn_backward, global_avg_pool_nodes,
    global_avg_pool_nodes_backward, glorot_uniform, Activation, ParamSet, Tensor,
};

const CONV_W: usize = 0;
const CONV_B: usize = 1;
const GCN_W: usize = 2;
const HIDDEN_W: usize = 3;
const HIDDEN_B: usize = 4;
const OUT_W: usize = 5;
const OUT_B: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct Stgcn {
    pub config: ModelConfig,
    pub params: ParamSet,
}

struct Activations {
    aggregated: Tensor,
    gcn_out: Tensor,
    pooled_nodes: Tensor,
    hidden: Tensor,
    output: Tensor,
}

impl Stgcn {
    pub fn init(config: ModelConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (k, f, g, h) = (
            config.kernel_size,
            config.filters,
            config.gcn_features,
            config.hidden_width,
        );
        let mut params = ParamSet::new();
        params.push("conv.kernel", glorot_uniform(&[k, 1, f], k, k * f, &mut rng));
        params.push("conv.bias", Tensor::zeros(&[f]));
        params.push("gcn.weight", glorot_uniform(&[f, g], f, g, &mut rng));
        params.push("hidden.weight", glorot_uniform(&[g, h], g, h, &mut rng));
        params.push("hidden.bias", Tensor::zeros(&[h]));
        params.push("output.weight", glorot_uniform(&[h, 1], h, 1, &mut rng));
        params.push("output.bias", Tensor::zeros(&[1]));
        Self { config, params }
    }

    /// Rebuild from stored parameters, checking their shapes against `config`.
    pub fn from_params(config: ModelConfig, params: ParamSet) -> Result<Self> {
        let expected = Self::init(config);
        if !expected.params.same_layout(&params) {
            return Err(Error::Shape("ST-GCN parameters do not match the configuration".into()));
        }
        Ok(Self { config, params })
    }

    fn run(&self, signal: &[f64], channels: usize, samples: usize, a_hat: &Adjacency) -> Result<Activations> {
        if a_hat.n() != channels {
            return Err(Error::Shape(format!(
                "{channels} channels but a {}-node graph",
                a_hat.n()
            )));
        }
        let p = &self.params;
        let pooled_time = conv_pool_forward(signal, channels, samples, p.block(CONV_W), p.block(CONV_B))?;
        let (gcn_out, aggregated) = gcn_apply(&pooled_time, a_hat, p.block(GCN_W))?;
        let pooled_nodes = global_avg_pool_nodes(&gcn_out)?;
        let hidden = dense(&pooled_nodes, p.block(HIDDEN_W), p.block(HIDDEN_B), Activation::Relu)?;
        let output = dense(&hidden, p.block(OUT_W), p.block(OUT_B), Activation::Sigmoid)?;
        Ok(Activations {
            aggregated,
            gcn_out,
            pooled_nodes,
            hidden,
            output,
        })
    }

    /// Probability of the stressed class for a normalized `channels x samples` signal.
    pub fn forward(&self, signal: &[f64], channels: usize, samples: usize, a_hat: &Adjacency) -> Result<f64> {
        Ok(self.run(signal, channels, samples, a_hat)?.output.data()[0])
    }

    pub fn forward_backward(
        &self,
        signal: &[f64],
        channels: usize,
        samples: usize,
        a_hat: &Adjacency,
        upstream: impl FnOnce(f64) -> f64,
    ) -> Result<(f64, ParamSet)> {
        let (prob, grads, _) = self.backward(signal, channels, samples, a_hat, upstream, false)?;
        Ok((prob, grads))
    }

    /// Like [`Stgcn::forward_backward`] but also returns `dLoss/dsignal`.
    pub fn forward_backward_with_input(
        &self,
        signal: &[f64],
        channels: usize,
        samples: usize,
        a_hat: &Adjacency,
        upstream: impl FnOnce(f64) -> f64,
    ) -> Result<(f64, ParamSet, Vec<f64>)> {
        let (prob, grads, gx) = self.backward(signal, channels, samples, a_hat, upstream, true)?;
        Ok((prob, grads, gx.expect("input gradient requested")))
    }

    fn backward(
        &self,
        signal: &[f64],
        channels: usize,
        samples: usize,
        a_hat: &Adjacency,
        upstream: impl FnOnce(f64) -> f64,
        want_input: bool,
    ) -> Result<(f64, ParamSet, Option<Vec<f64>>)> {
        let p = &self.params;
        let act = self.run(signal, channels, samples, a_hat)?;
        let prob = act.output.data()[0];
        let mut grads = p.zeros_like();

        let g_out = Tensor::new(vec![1], vec![upstream(prob)])?;
        let d = dense_backward(
            &act.hidden,
            p.block(OUT_W),
            p.block(OUT_B),
            &act.output,
            &g_out,
            Activation::Sigmoid,
        )?;
        *grads.block_mut(OUT_W) = d.weight;
        *grads.block_mut(OUT_B) = d.bias;

        let d = dense_backward(
            &act.pooled_nodes,
            p.block(HIDDEN_W),
            p.block(HIDDEN_B),
            &act.hidden,
            &d.input,
            Activation::Relu,
        )?;
        *grads.block_mut(HIDDEN_W) = d.weight;
        *grads.block_mut(HIDDEN_B) = d.bias;

        let g_nodes = global_avg_pool_nodes_backward(&d.input, channels)?;
        let g = gcn_backward(a_hat, p.block(GCN_W), &act.aggregated, &act.gcn_out, &g_nodes)?;
        *grads.block_mut(GCN_W) = g.weight;

        let mut gk = p.block(CONV_W).zeros_like();
        let mut gb = p.block(CONV_B).zeros_like();
        let mut gx = want_input.then(|| vec![0.0; signal.len()]);
        conv_pool_backward(
            signal,
            channels,
            samples,
            p.block(CONV_W),
            p.block(CONV_B),
            &g.input,
            &mut gk,
            &mut gb,
            gx.as_deref_mut(),
        )?;
        *grads.block_mut(CONV_W) = gk;
        *grads.block_mut(CONV_B) = gb;
        Ok((prob, grads, gx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{renormalize, AdjacencyKind};
    use crate::nn::{bce_loss, gradcheck};
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn toy_config() -> ModelConfig {
        ModelConfig {
            filters: 4,
            gcn_features: 4,
            kernel_size: 5,
            hidden_width: 6,
            ..ModelConfig::stgcn()
        }
        .with_seed(17)
    }

    fn random_graph(n: usize, rng: &mut ChaCha8Rng) -> Adjacency {
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(0.6) {
                    let v = rng.gen_range(0.2..3.0);
                    w[i * n + j] = v;
                    w[j * n + i] = v;
                }
            }
        }
        renormalize(&Adjacency::from_weights(AdjacencyKind::Fused, n, w).unwrap()).unwrap()
    }

    fn with_nonzero_biases(mut m: Stgcn, rng: &mut ChaCha8Rng) -> Stgcn {
        for b in [CONV_B, HIDDEN_B, OUT_B] {
            m.params
                .block_mut(b)
                .data_mut()
                .iter_mut()
                .for_each(|v| *v = rng.gen_range(0.0..0.2));
        }
        m
    }

    #[test]
    fn zero_signal_gives_one_half() {
        let m = Stgcn::init(ModelConfig::stgcn());
        let a = renormalize(&Adjacency::from_weights(AdjacencyKind::Fused, 3, vec![0.0; 9]).unwrap()).unwrap();
        assert_eq!(m.forward(&[0.0; 30], 3, 10, &a).unwrap(), 0.5);
    }

    #[test]
    fn channel_permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = with_nonzero_biases(Stgcn::init(toy_config()), &mut rng);
        let (n, t) = (5, 24);
        let a = random_graph(n, &mut rng);
        let x: Vec<f64> = (0..n * t).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let xp: Vec<f64> = perm.iter().flat_map(|&c| x[c * t..(c + 1) * t].to_vec()).collect();
        let p0 = m.forward(&x, n, t, &a).unwrap();
        let p1 = m.forward(&xp, n, t, &a.permuted(&perm)).unwrap();
        assert!((p0 - p1).abs() < 1e-12);
        assert!(p0 > 0.0 && p0 < 1.0);
    }

    #[test]
    fn toy_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = with_nonzero_biases(Stgcn::init(toy_config()), &mut rng);
        let (n, t) = (4, 32);
        let a = random_graph(n, &mut rng);
        let x: Vec<f64> = (0..n * t).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let loss = |p: f64| bce_loss(&[p], &[1.0]).unwrap();
        let (_, analytic, gx) = m.forward_backward_with_input(&x, n, t, &a, |p| loss(p).1[0]).unwrap();
        let f = |params: &ParamSet| {
            let probe = Stgcn {
                config: m.config,
                params: params.clone(),
            };
            loss(probe.forward(&x, n, t, &a).unwrap()).0
        };
        let rep = gradcheck(&m.params, &analytic, f, 1e-4);
        assert!(rep.passed, "{rep:?}");

        let mut input = ParamSet::new();
        input.push("signal", Tensor::new(vec![n * t], x.clone()).unwrap());
        let mut ginput = ParamSet::new();
        ginput.push("signal", Tensor::new(vec![n * t], gx).unwrap());
        let f = |p: &ParamSet| loss(m.forward(p.block(0).data(), n, t, &a).unwrap()).0;
        let rep = gradcheck(&input, &ginput, f, 1e-4);
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn zero_bias_conv_is_positively_homogeneous() {
        // With zero biases everywhere before the hidden layer, scaling the
        // input by c >= 0 scales the node-pooled features by c.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = Stgcn::init(toy_config());
        let (n, t) = (3, 16);
        let a = random_graph(n, &mut rng);
        let x: Vec<f64> = (0..n * t).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x3: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let v1 = m.run(&x, n, t, &a).unwrap().pooled_nodes;
        let v3 = m.run(&x3, n, t, &a).unwrap().pooled_nodes;
        for (a, b) in v1.data().iter().zip(v3.data()) {
            assert!((3.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_graph_size_mismatch() {
        let m = Stgcn::init(toy_config());
        let a = renormalize(&Adjacency::from_weights(AdjacencyKind::Fused, 2, vec![0.0; 4]).unwrap()).unwrap();
        assert!(m.forward(&[0.0; 30], 3, 10, &a).is_err());
    }
}
