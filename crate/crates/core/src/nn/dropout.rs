use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Tensor;
use crate::error::{Error, Result};

/// Per-element multipliers applied by a dropout forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct DropoutMask(Vec<f64>);

impl DropoutMask {
    pub fn factors(&self) -> &[f64] {
        &self.0
    }
}

/// Inverted dropout: in training each element is zeroed with probability
/// `rate` and survivors are scaled by `1 / (1 - rate)`; inference is the identity.
pub fn dropout(x: &Tensor, rate: f64, training: bool, seed: u64) -> Result<(Tensor, DropoutMask)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Config(format!("dropout rate must lie in [0,1), got {rate}")));
    }
    if !training || rate == 0.0 {
        return Ok((x.clone(), DropoutMask(vec![1.0; x.len()])));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let keep = 1.0 / (1.0 - rate);
    let mask: Vec<f64> = (0..x.len())
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect();
    let out = x.data().iter().zip(&mask).map(|(a, m)| a * m).collect();
    Ok((Tensor::new(x.shape().to_vec(), out)?, DropoutMask(mask)))
}

pub fn dropout_backward(grad: &Tensor, mask: &DropoutMask) -> Result<Tensor> {
    if grad.len() != mask.0.len() {
        return Err(Error::Shape("dropout mask/grad size mismatch".into()));
    }
    Tensor::new(
        grad.shape().to_vec(),
        grad.data().iter().zip(&mask.0).map(|(g, m)| g * m).collect(),
    )
}
