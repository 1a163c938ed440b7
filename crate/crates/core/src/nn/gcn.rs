//! Graph convolution `ReLU(Â Z W)` with a fixed propagation matrix `Â`.

use super::Tensor;
use crate::error::{Error, Result};
use crate::graph::Adjacency;

pub struct GcnGrads {
    pub input: Tensor,
    pub weight: Tensor,
}

fn dims(z: &Tensor, a_hat: &Adjacency, w: &Tensor) -> Result<(usize, usize, usize)> {
    let &[n, f] = z.shape() else {
        return Err(Error::Shape(format!("gcn input must be N x F, got {:?}", z.shape())));
    };
    let &[fw, f_out] = w.shape() else {
        return Err(Error::Shape(format!("gcn weight must be F x F', got {:?}", w.shape())));
    };
    if fw != f || a_hat.n() != n {
        return Err(Error::Shape(format!(
            "gcn: input {n}x{f}, weight {fw}x{f_out}, graph {}x{0}",
            a_hat.n()
        )));
    }
    Ok((n, f, f_out))
}

fn matmul(a: &[f64], b: &[f64], rows: usize, inner: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        let o = &mut out[i * cols..(i + 1) * cols];
        for k in 0..inner {
            let aik = a[i * inner + k];
            if aik == 0.0 {
                continue;
            }
            for (ov, bv) in o.iter_mut().zip(&b[k * cols..(k + 1) * cols]) {
                *ov += aik * bv;
            }
        }
    }
    out
}

fn transpose(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = a[i * cols + j];
        }
    }
    out
}

/// Forward pass. Returns `(output, Â Z)`; the latter is needed by the backward pass.
pub fn gcn_apply(z: &Tensor, a_hat: &Adjacency, w: &Tensor) -> Result<(Tensor, Tensor)> {
    let (n, f, f_out) = dims(z, a_hat, w)?;
    let agg = matmul(a_hat.weights(), z.data(), n, n, f);
    let mut out = matmul(&agg, w.data(), n, f, f_out);
    out.iter_mut().for_each(|v| *v = v.max(0.0));
    Ok((Tensor::new(vec![n, f_out], out)?, Tensor::new(vec![n, f], agg)?))
}

pub fn gcn_backward(
    a_hat: &Adjacency,
    w: &Tensor,
    aggregated: &Tensor,
    output: &Tensor,
    grad_output: &Tensor,
) -> Result<GcnGrads> {
    let (n, f, f_out) = dims(aggregated, a_hat, w)?;
    grad_output.expect_shape("gcn grad", &[n, f_out])?;
    let dpre: Vec<f64> = output
        .data()
        .iter()
        .zip(grad_output.data())
        .map(|(&o, &g)| if o > 0.0 { g } else { 0.0 })
        .collect();
    let gw = matmul(&transpose(aggregated.data(), n, f), &dpre, f, n, f_out);
    let d_agg = matmul(&dpre, &transpose(w.data(), f, f_out), n, f_out, f);
    let gz = matmul(&transpose(a_hat.weights(), n, n), &d_agg, n, n, f);
    Ok(GcnGrads {
        input: Tensor::new(vec![n, f], gz)?,
        weight: Tensor::new(vec![f, f_out], gw)?,
    })
}
