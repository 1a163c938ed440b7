//! Differentiable building blocks with explicit backward passes.
//!
//! Every kernel is a pair of free functions: a forward pass that returns its
//! output (and whatever it needs to remember), and a backward pass that maps
//! the gradient of the output to gradients of the inputs and parameters.
//! Gradients live in a [`ParamSet`] with the same block layout as the
//! parameters, so per-sample gradients can be computed independently and
//! reduced afterwards.

mod adam;
mod conv;
mod dense;
mod dropout;
mod gcn;
mod gradcheck;
mod loss;
mod pool;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use adam::{AdamConfig, AdamState};
pub use conv::{conv1d_td, conv1d_td_backward, conv_pool_backward, conv_pool_forward, ConvGrads};
pub use dense::{dense, dense_backward, Activation, DenseGrads};
pub use dropout::{dropout, dropout_backward, DropoutMask};
pub use gcn::{gcn_apply, gcn_backward, GcnGrads};
pub use gradcheck::{gradcheck, relative_error, BlockError, GradcheckReport};
pub use loss::{bce_loss, bce_loss_weighted, sigmoid, PROB_CLIP};
pub use pool::{
    global_avg_pool_nodes, global_avg_pool_nodes_backward, global_avg_pool_time, global_avg_pool_time_backward,
};

/// Dense row-major array of `f64`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::Shape(format!("{} values for shape {shape:?}", data.len())));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn from_fn(shape: &[usize], f: impl FnMut(usize) -> f64) -> Self {
        let len = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: (0..len).map(f).collect(),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(&self.shape)
    }

    pub fn add_assign(&mut self, other: &Tensor) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn expect_shape(&self, what: &str, shape: &[usize]) -> Result<()> {
        if self.shape != shape {
            return Err(Error::Shape(format!(
                "{what}: expected {shape:?}, got {:?}",
                self.shape
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamBlock {
    pub name: String,
    pub tensor: Tensor,
}

/// Ordered, named collection of tensors: model parameters or their gradients.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamSet {
    blocks: Vec<ParamBlock>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, tensor: Tensor) -> usize {
        self.blocks.push(ParamBlock {
            name: name.into(),
            tensor,
        });
        self.blocks.len() - 1
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[ParamBlock] {
        &self.blocks
    }

    pub fn blocks_mut(&mut self) -> &mut [ParamBlock] {
        &mut self.blocks
    }

    pub fn block(&self, index: usize) -> &Tensor {
        &self.blocks[index].tensor
    }

    pub fn block_mut(&mut self, index: usize) -> &mut Tensor {
        &mut self.blocks[index].tensor
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.blocks.iter().find(|b| b.name == name).map(|b| &b.tensor)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.blocks.iter_mut().find(|b| b.name == name).map(|b| &mut b.tensor)
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .map(|b| ParamBlock {
                    name: b.name.clone(),
                    tensor: b.tensor.zeros_like(),
                })
                .collect(),
        }
    }

    pub fn same_layout(&self, other: &ParamSet) -> bool {
        self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a.name == b.name && a.tensor.shape == b.tensor.shape)
    }

    pub fn add_assign(&mut self, other: &ParamSet) {
        debug_assert!(self.same_layout(other));
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.tensor.add_assign(&b.tensor);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for b in &mut self.blocks {
            b.tensor.scale(factor);
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.blocks.iter().map(|b| b.tensor.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(|b| b.tensor.is_finite())
    }

    /// Sum of gradients in order; `None` for an empty slice.
    pub fn sum(items: &[ParamSet]) -> Option<ParamSet> {
        let (first, rest) = items.split_first()?;
        let mut acc = first.clone();
        for g in rest {
            acc.add_assign(g);
        }
        Some(acc)
    }
}

/// Glorot-uniform initialisation in `±sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut impl rand::Rng) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Tensor::from_fn(shape, |_| rng.gen_range(-limit..=limit))
}
