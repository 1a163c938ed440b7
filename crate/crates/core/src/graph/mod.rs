//! Hybrid connectivity graphs.
//!
//! Structural edges join each electrode to its `k` nearest neighbours with
//! weight `1 / (distance + epsilon)`. Functional edges join channels whose
//! Pearson correlation exceeds `tau`. The fused graph is their elementwise
//! mean, and the GCN propagates over `D^-1/2 (A + I) D^-1/2`.

mod metrics;

use serde::{Deserialize, Serialize};

use crate::data::{ElectrodeLayout, Trial};
use crate::error::{Error, Result};

pub use metrics::{graph_metrics, graph_metrics_with, mean_metrics, GraphMetrics, PathLength};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    /// Nearest neighbours per electrode in the structural graph.
    pub k: usize,
    /// Correlation threshold for functional edges (strict).
    pub tau: f64,
    /// Distance regularizer in the structural weight.
    pub epsilon: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            k: 2,
            tau: 0.5,
            epsilon: 1e-6,
        }
    }
}

impl GraphConfig {
    pub fn validate(&self, channels: usize) -> Result<()> {
        if self.k == 0 || self.k >= channels {
            return Err(Error::Config(format!(
                "k must satisfy 0 < k < N = {channels}, got {}",
                self.k
            )));
        }
        self.validate_tau()?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }

    fn validate_tau(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Config(format!("tau must lie in (0,1), got {}", self.tau)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdjacencyKind {
    Structural,
    Functional,
    Fused,
    Renormalized,
}

/// Dense symmetric non-negative `n x n` weight matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Adjacency {
    kind: AdjacencyKind,
    n: usize,
    weights: Vec<f64>,
}

impl Adjacency {
    /// Wrap a weight matrix after checking symmetry, sign and (except for
    /// renormalized matrices) a zero diagonal.
    pub fn from_weights(kind: AdjacencyKind, n: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::Shape(format!(
                "{} weights for a {n}x{n} adjacency",
                weights.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let w = weights[i * n + j];
                if !(w >= 0.0 && w.is_finite()) {
                    return Err(Error::Config(format!(
                        "weight ({i},{j}) = {w} is not a finite non-negative value"
                    )));
                }
                if w != weights[j * n + i] {
                    return Err(Error::NotSymmetric((w - weights[j * n + i]).abs()));
                }
            }
            if kind != AdjacencyKind::Renormalized && weights[i * n + i] != 0.0 {
                return Err(Error::Config(format!("non-zero diagonal at node {i}")));
            }
        }
        if kind == AdjacencyKind::Functional && weights.iter().any(|&w| w != 0.0 && w != 1.0) {
            return Err(Error::Config("functional adjacency must be binary".into()));
        }
        Ok(Self { kind, n, weights })
    }

    pub fn kind(&self) -> AdjacencyKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn edge_count(&self) -> usize {
        let mut m = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.get(i, j) > 0.0 {
                    m += 1;
                }
            }
        }
        m
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Relabel nodes so that new node `i` is old node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                weights[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        Self {
            kind: self.kind,
            n,
            weights,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.weights.chunks_exact(self.n) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Pearson correlation, defined as 0 when either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("pearson on lengths {} and {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Shape("pearson needs at least 2 samples".into()));
    }
    let cx = Centered::new(x);
    let cy = Centered::new(y);
    Ok(cx.correlation(&cy))
}

struct Centered {
    values: Vec<f64>,
    sum_sq: f64,
}

impl Centered {
    fn new(x: &[f64]) -> Self {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let values: Vec<f64> = x.iter().map(|v| v - mean).collect();
        let sum_sq = values.iter().map(|v| v * v).sum();
        // Rounding residue of a constant signal is not variance.
        let floor = 1e-24 * mean.abs().max(1.0).powi(2) * x.len() as f64;
        Self {
            values,
            sum_sq: if sum_sq <= floor { 0.0 } else { sum_sq },
        }
    }

    fn correlation(&self, other: &Centered) -> f64 {
        if self.sum_sq == 0.0 || other.sum_sq == 0.0 {
            return 0.0;
        }
        let dot: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        (dot / (self.sum_sq * other.sum_sq).sqrt()).clamp(-1.0, 1.0)
    }
}

/// Pairwise Pearson matrix between the channels of `trial` (diagonal = 1 for
/// non-constant channels, 0 otherwise).
pub fn correlation_matrix(trial: &Trial) -> Vec<f64> {
    let n = trial.channels();
    let rows: Vec<Centered> = trial.rows().map(Centered::new).collect();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        out[i * n + i] = if rows[i].sum_sq > 0.0 { 1.0 } else { 0.0 };
        for j in i + 1..n {
            let r = rows[i].correlation(&rows[j]);
            out[i * n + j] = r;
            out[j * n + i] = r;
        }
    }
    out
}

/// Inverse-distance kNN graph, symmetrized by union. Distance ties go to the
/// lower channel index.
pub fn structural_adjacency(layout: &ElectrodeLayout, config: &GraphConfig) -> Result<Adjacency> {
    let n = layout.len();
    config.validate(n)?;
    let dist = |i: usize, j: usize| {
        let (a, b) = (layout.position(i), layout.position(j));
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    };
    let mut weights = vec![0.0; n * n];
    for i in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n).filter(|&j| j != i).map(|j| (dist(i, j), j)).collect();
        others.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        for &(d, j) in others.iter().take(config.k) {
            let w = 1.0 / (d + config.epsilon);
            weights[i * n + j] = w;
            weights[j * n + i] = w;
        }
    }
    Adjacency::from_weights(AdjacencyKind::Structural, n, weights)
}

/// Binary graph with an edge wherever the channel correlation exceeds `tau`.
pub fn functional_adjacency(trial: &Trial, config: &GraphConfig) -> Result<Adjacency> {
    config.validate_tau()?;
    let n = trial.channels();
    let corr = correlation_matrix(trial);
    let mut weights = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j && corr[i * n + j] > config.tau {
                weights[i * n + j] = 1.0;
            }
        }
    }
    Adjacency::from_weights(AdjacencyKind::Functional, n, weights)
}

/// Elementwise mean of a structural and a functional graph.
pub fn fuse_adjacency(structural: &Adjacency, functional: &Adjacency) -> Result<Adjacency> {
    if structural.kind != AdjacencyKind::Structural || functional.kind != AdjacencyKind::Functional {
        return Err(Error::Config(format!(
            "fuse expects (structural, functional), got ({:?}, {:?})",
            structural.kind, functional.kind
        )));
    }
    if structural.n != functional.n {
        return Err(Error::Shape(format!(
            "fusing {}-node and {}-node graphs",
            structural.n, functional.n
        )));
    }
    let weights = structural
        .weights
        .iter()
        .zip(&functional.weights)
        .map(|(s, f)| (s + f) / 2.0)
        .collect();
    Ok(Adjacency {
        kind: AdjacencyKind::Fused,
        n: structural.n,
        weights,
    })
}

/// `D^-1/2 (A + I) D^-1/2` with `D` the degree matrix of `A + I`.
pub fn renormalize(a: &Adjacency) -> Result<Adjacency> {
    if a.kind == AdjacencyKind::Renormalized {
        return Err(Error::Config("adjacency is already renormalized".into()));
    }
    let n = a.n;
    let inv_sqrt: Vec<f64> = a
        .weights
        .chunks_exact(n)
        .map(|row| 1.0 / (1.0 + row.iter().sum::<f64>()).sqrt())
        .collect();
    let mut weights = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let tilde = a.get(i, j) + if i == j { 1.0 } else { 0.0 };
            let w = inv_sqrt[i] * tilde * inv_sqrt[j];
            weights[i * n + j] = w;
            weights[j * n + i] = w;
        }
    }
    Ok(Adjacency {
        kind: AdjacencyKind::Renormalized,
        n,
        weights,
    })
}

/// Fused graph of one trial given the layout's structural graph.
pub fn fused_adjacency(trial: &Trial, structural: &Adjacency, config: &GraphConfig) -> Result<Adjacency> {
    if trial.channels() != structural.n() {
        return Err(Error::Shape(format!(
            "trial `{}` has {} channels, structural graph has {}",
            trial.id,
            trial.channels(),
            structural.n()
        )));
    }
    fuse_adjacency(structural, &functional_adjacency(trial, config)?)
}
