use std::collections::VecDeque;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Adjacency;
use crate::eigen::symmetric_eigenvalues;
use crate::error::Result;

/// Summary statistics of a graph's binarized support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphMetrics {
    pub algebraic_connectivity: f64,
    pub avg_clustering: f64,
    /// `inf` (serialized as `null`) when the graph is disconnected.
    #[serde(serialize_with = "ser_inf_as_null", deserialize_with = "de_null_as_inf")]
    pub avg_shortest_path: f64,
    pub avg_degree: f64,
}

fn ser_inf_as_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn de_null_as_inf<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

/// Edge length used by the average shortest path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathLength {
    /// Every edge has length 1.
    #[default]
    Hops,
    /// Edge length is `1 / weight`.
    InverseWeight,
}

pub fn graph_metrics(a: &Adjacency) -> Result<GraphMetrics> {
    graph_metrics_with(a, PathLength::Hops)
}

pub fn graph_metrics_with(a: &Adjacency, path_length: PathLength) -> Result<GraphMetrics> {
    let n = a.n();
    let support: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && a.get(i, j) > 0.0).collect())
        .collect();
    let degree: Vec<usize> = support.iter().map(Vec::len).collect();
    let avg_degree = degree.iter().sum::<usize>() as f64 / n as f64;

    let mut clustering = 0.0;
    for nbrs in &support {
        let d = nbrs.len();
        if d < 2 {
            continue;
        }
        let mut links = 0usize;
        for (x, &u) in nbrs.iter().enumerate() {
            for &v in &nbrs[x + 1..] {
                if a.get(u, v) > 0.0 {
                    links += 1;
                }
            }
        }
        clustering += 2.0 * links as f64 / (d * (d - 1)) as f64;
    }
    let avg_clustering = clustering / n as f64;

    let hops = all_pairs_hops(&support);
    let connected = hops.iter().all(|row| row.iter().all(Option::is_some));

    let avg_shortest_path = if !connected {
        f64::INFINITY
    } else {
        let pairs = (n * (n - 1) / 2) as f64;
        match path_length {
            PathLength::Hops => {
                let total: usize = hops
                    .iter()
                    .enumerate()
                    .flat_map(|(i, row)| row[i + 1..].iter().map(|h| h.unwrap()))
                    .sum();
                total as f64 / pairs
            }
            PathLength::InverseWeight => {
                let dist = weighted_all_pairs(a);
                let mut total = 0.0;
                for i in 0..n {
                    for j in i + 1..n {
                        total += dist[i * n + j];
                    }
                }
                total / pairs
            }
        }
    };

    let algebraic_connectivity = if connected {
        let mut laplacian = vec![0.0; n * n];
        for i in 0..n {
            laplacian[i * n + i] = degree[i] as f64;
            for &j in &support[i] {
                laplacian[i * n + j] = -1.0;
            }
        }
        symmetric_eigenvalues(&laplacian, n)?[1].max(0.0)
    } else {
        0.0
    };

    Ok(GraphMetrics {
        algebraic_connectivity,
        avg_clustering,
        avg_shortest_path,
        avg_degree,
    })
}

/// Mean of each field over many graphs.
pub fn mean_metrics(all: &[GraphMetrics]) -> Option<GraphMetrics> {
    if all.is_empty() {
        return None;
    }
    let m = all.len() as f64;
    let mean = |f: fn(&GraphMetrics) -> f64| all.iter().map(f).sum::<f64>() / m;
    Some(GraphMetrics {
        algebraic_connectivity: mean(|g| g.algebraic_connectivity),
        avg_clustering: mean(|g| g.avg_clustering),
        avg_shortest_path: mean(|g| g.avg_shortest_path),
        avg_degree: mean(|g| g.avg_degree),
    })
}

fn all_pairs_hops(support: &[Vec<usize>]) -> Vec<Vec<Option<usize>>> {
    let n = support.len();
    (0..n)
        .map(|src| {
            let mut dist = vec![None; n];
            dist[src] = Some(0);
            let mut queue = VecDeque::from([src]);
            while let Some(u) = queue.pop_front() {
                let du = dist[u].unwrap();
                for &v in &support[u] {
                    if dist[v].is_none() {
                        dist[v] = Some(du + 1);
                        queue.push_back(v);
                    }
                }
            }
            dist
        })
        .collect()
}

fn weighted_all_pairs(a: &Adjacency) -> Vec<f64> {
    let n = a.n();
    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
        for j in 0..n {
            let w = a.get(i, j);
            if i != j && w > 0.0 {
                d[i * n + j] = 1.0 / w;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik.is_infinite() {
                continue;
            }
            for j in 0..n {
                let cand = dik + d[k * n + j];
                if cand < d[i * n + j] {
                    d[i * n + j] = cand;
                }
            }
        }
    }
    d
}
