use super::Tensor;
use crate::error::{Error, Result};

/// Mean over the time axis: `N x T x F -> N x F`.
pub fn global_avg_pool_time(x: &Tensor) -> Result<Tensor> {
    let &[n, t, f] = x.shape() else {
        return Err(Error::Shape(format!(
            "time pooling expects N x T x F, got {:?}",
            x.shape()
        )));
    };
    if t == 0 {
        return Err(Error::Shape("time pooling over zero samples".into()));
    }
    let mut out = vec![0.0; n * f];
    for (block, o) in x.data().chunks_exact(t * f).zip(out.chunks_exact_mut(f)) {
        for step in block.chunks_exact(f) {
            o.iter_mut().zip(step).for_each(|(a, b)| *a += b);
        }
        o.iter_mut().for_each(|v| *v /= t as f64);
    }
    Tensor::new(vec![n, f], out)
}

/// Spreads each pooled gradient uniformly (`1/T`) over the time axis.
pub fn global_avg_pool_time_backward(grad: &Tensor, samples: usize) -> Result<Tensor> {
    let &[n, f] = grad.shape() else {
        return Err(Error::Shape(format!("expected N x F gradient, got {:?}", grad.shape())));
    };
    let mut out = Vec::with_capacity(n * samples * f);
    for g in grad.data().chunks_exact(f) {
        for _ in 0..samples {
            out.extend(g.iter().map(|v| v / samples as f64));
        }
    }
    Tensor::new(vec![n, samples, f], out)
}

/// Mean over nodes: `N x F -> F`.
pub fn global_avg_pool_nodes(z: &Tensor) -> Result<Tensor> {
    let &[n, f] = z.shape() else {
        return Err(Error::Shape(format!("node pooling expects N x F, got {:?}", z.shape())));
    };
    if n == 0 {
        return Err(Error::Shape("node pooling over zero nodes".into()));
    }
    let mut out = vec![0.0; f];
    for row in z.data().chunks_exact(f) {
        out.iter_mut().zip(row).for_each(|(a, b)| *a += b);
    }
    out.iter_mut().for_each(|v| *v /= n as f64);
    Tensor::new(vec![f], out)
}

pub fn global_avg_pool_nodes_backward(grad: &Tensor, nodes: usize) -> Result<Tensor> {
    let &[f] = grad.shape() else {
        return Err(Error::Shape(format!("expected F gradient, got {:?}", grad.shape())));
    };
    let row: Vec<f64> = grad.data().iter().map(|v| v / nodes as f64).collect();
    Tensor::new(vec![nodes, f], row.repeat(nodes))
}
