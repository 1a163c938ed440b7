//! Flattened-input baseline: dense(ReLU) -> dropout -> dense(sigmoid).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ModelConfig;
use crate::error::{Error, Result};
use crate::nn::{dense, dense_backward, dropout, dropout_backward, glorot_uniform, Activation, ParamSet, Tensor};

const HIDDEN_W: usize = 0;
const HIDDEN_B: usize = 1;
const OUT_W: usize = 2;
const OUT_B: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub config: ModelConfig,
    pub channels: usize,
    pub samples: usize,
    pub params: ParamSet,
}

impl Mlp {
    pub fn init(config: ModelConfig, channels: usize, samples: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let width = channels * samples;
        let h = config.hidden_width;
        let mut params = ParamSet::new();
        params.push("hidden.weight", glorot_uniform(&[width, h], width, h, &mut rng));
        params.push("hidden.bias", Tensor::zeros(&[h]));
        params.push("output.weight", glorot_uniform(&[h, 1], h, 1, &mut rng));
        params.push("output.bias", Tensor::zeros(&[1]));
        Self {
            config,
            channels,
            samples,
            params,
        }
    }

    pub fn from_params(config: ModelConfig, channels: usize, samples: usize, params: ParamSet) -> Result<Self> {
        let expected = Self::init(config, channels, samples);
        if !expected.params.same_layout(&params) {
            return Err(Error::Shape("MLP parameters do not match the configuration".into()));
        }
        Ok(Self { params, ..expected })
    }

    fn input(&self, signal: &[f64], channels: usize, samples: usize) -> Result<Tensor> {
        if channels != self.channels || samples != self.samples {
            return Err(Error::Shape(format!(
                "MLP was built for {}x{} inputs, got {channels}x{samples}",
                self.channels, self.samples
            )));
        }
        Tensor::new(vec![signal.len()], signal.to_vec())
    }

    pub fn forward(&self, signal: &[f64], channels: usize, samples: usize, training: bool, seed: u64) -> Result<f64> {
        let p = &self.params;
        let x = self.input(signal, channels, samples)?;
        let h = dense(&x, p.block(HIDDEN_W), p.block(HIDDEN_B), Activation::Relu)?;
        let (hd, _) = dropout(&h, self.config.dropout_rate, training, seed)?;
        Ok(dense(&hd, p.block(OUT_W), p.block(OUT_B), Activation::Sigmoid)?.data()[0])
    }

    /// Training-mode pass with dropout drawn from `seed`.
    pub fn forward_backward(
        &self,
        signal: &[f64],
        channels: usize,
        samples: usize,
        seed: u64,
        upstream: impl FnOnce(f64) -> f64,
    ) -> Result<(f64, ParamSet)> {
        let p = &self.params;
        let x = self.input(signal, channels, samples)?;
        let h = dense(&x, p.block(HIDDEN_W), p.block(HIDDEN_B), Activation::Relu)?;
        let (hd, mask) = dropout(&h, self.config.dropout_rate, true, seed)?;
        let out = dense(&hd, p.block(OUT_W), p.block(OUT_B), Activation::Sigmoid)?;
        let prob = out.data()[0];

        let mut grads = p.zeros_like();
        let g_out = Tensor::new(vec![1], vec![upstream(prob)])?;
        let d = dense_backward(&hd, p.block(OUT_W), p.block(OUT_B), &out, &g_out, Activation::Sigmoid)?;
        *grads.block_mut(OUT_W) = d.weight;
        *grads.block_mut(OUT_B) = d.bias;
        let gh = dropout_backward(&d.input, &mask)?;
        let d = dense_backward(&x, p.block(HIDDEN_W), p.block(HIDDEN_B), &h, &gh, Activation::Relu)?;
        *grads.block_mut(HIDDEN_W) = d.weight;
        *grads.block_mut(HIDDEN_B) = d.bias;
        Ok((prob, grads))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{bce_loss, gradcheck};
    use rand::Rng;

    #[test]
    fn zero_input_gives_one_half() {
        let m = Mlp::init(ModelConfig::mlp(), 2, 5);
        assert_eq!(m.forward(&[0.0; 10], 2, 5, false, 0).unwrap(), 0.5);
    }

    #[test]
    fn inference_is_deterministic_and_shape_checked() {
        let m = Mlp::init(ModelConfig::mlp().with_seed(4), 3, 8);
        let x: Vec<f64> = (0..24).map(|i| (i as f64 * 0.37).sin()).collect();
        assert_eq!(
            m.forward(&x, 3, 8, false, 1).unwrap(),
            m.forward(&x, 3, 8, false, 2).unwrap()
        );
        assert!(m.forward(&x[..21], 3, 7, false, 0).is_err());
    }

    #[test]
    fn toy_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let cfg = ModelConfig {
            hidden_width: 5,
            ..ModelConfig::mlp()
        }
        .with_seed(2);
        let mut m = Mlp::init(cfg, 3, 6);
        m.params
            .block_mut(HIDDEN_B)
            .data_mut()
            .iter_mut()
            .for_each(|v| *v = rng.gen_range(0.0..0.1));
        let x: Vec<f64> = (0..18).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let seed = 99;
        let loss = |p: f64| bce_loss(&[p], &[0.0]).unwrap();
        let (_, analytic) = m.forward_backward(&x, 3, 6, seed, |p| loss(p).1[0]).unwrap();
        // Fixing the dropout seed fixes the mask, so the training-mode forward is
        // a deterministic function of the parameters.
        let f = |params: &ParamSet| {
            let probe = Mlp {
                params: params.clone(),
                ..m.clone()
            };
            loss(probe.forward(&x, 3, 6, true, seed).unwrap()).0
        };
        let rep = gradcheck(&m.params, &analytic, f, 1e-4);
        assert!(rep.passed, "{rep:?}");
    }
}
