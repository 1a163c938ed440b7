//! EEG stress classification on hybrid connectivity graphs.
//!
//! Each trial becomes a graph whose nodes are electrodes. Edges mix
//! structural connectivity (inverse distance between the `k` nearest
//! electrodes) with functional connectivity (thresholded Pearson
//! correlation between channel signals). A spatio-temporal graph
//! convolutional network with hand-written reverse-mode kernels classifies
//! the trial as relaxed or stressed.
//!
//! Module map:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`data`] | layouts, trials, datasets, normalization, stratified splits, file IO |
//! | [`graph`] | structural/functional/fused adjacency, propagation matrix, graph metrics |
//! | [`eigen`] | cyclic Jacobi eigensolver for symmetric matrices |
//! | [`nn`] | tensors, layer kernels with backward passes, BCE, Adam, gradient checks |
//! | [`models`] | ST-GCN and MLP networks, training loop, evaluation metrics, checkpoints |
//! | [`ablation`] | channel, region and time-segment ablation protocols |
//! | [`synth`] | seeded synthetic EEG with planted stress signatures |
//! | [`report`] | CSV/JSON writers and SVG figures |
//! | [`exec`] | data-parallel map with a sequential fallback |

pub mod ablation;
pub mod data;
pub mod eigen;
pub mod error;
pub mod exec;
pub mod graph;
pub mod models;
pub mod nn;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
pub use exec::Execution;
