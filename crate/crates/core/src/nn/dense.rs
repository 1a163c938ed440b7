use serde::{Deserialize, Serialize};

use super::{sigmoid, Tensor};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    None,
}

impl Activation {
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Sigmoid => sigmoid(v),
            Activation::None => v,
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, out: f64) -> f64 {
        match self {
            Activation::Relu => {
                if out > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => out * (1.0 - out),
            Activation::None => 1.0,
        }
    }
}

pub struct DenseGrads {
    pub input: Tensor,
    pub weight: Tensor,
    pub bias: Tensor,
}

fn dims(x: &Tensor, w: &Tensor, b: &Tensor) -> Result<(usize, usize, usize)> {
    let (rows, fan_in) = match x.shape() {
        [d] => (1, *d),
        [r, d] => (*r, *d),
        s => return Err(Error::Shape(format!("dense input must be 1-D or 2-D, got {s:?}"))),
    };
    let &[wi, fan_out] = w.shape() else {
        return Err(Error::Shape(format!("dense weight must be 2-D, got {:?}", w.shape())));
    };
    if wi != fan_in {
        return Err(Error::Shape(format!(
            "dense: input width {fan_in}, weight {wi}x{fan_out}"
        )));
    }
    b.expect_shape("dense bias", &[fan_out])?;
    Ok((rows, fan_in, fan_out))
}

fn out_shape(x: &Tensor, rows: usize, cols: usize) -> Vec<usize> {
    if x.shape().len() == 1 {
        vec![cols]
    } else {
        vec![rows, cols]
    }
}

/// `activation(x W + b)` for a vector or a batch of row vectors.
pub fn dense(x: &Tensor, w: &Tensor, b: &Tensor, activation: Activation) -> Result<Tensor> {
    let (rows, fan_in, fan_out) = dims(x, w, b)?;
    let mut out = Vec::with_capacity(rows * fan_out);
    for xr in x.data().chunks_exact(fan_in) {
        let mut acc = b.data().to_vec();
        for (i, &xv) in xr.iter().enumerate() {
            if xv == 0.0 {
                continue;
            }
            for (a, &wv) in acc.iter_mut().zip(&w.data()[i * fan_out..(i + 1) * fan_out]) {
                *a += xv * wv;
            }
        }
        out.extend(acc.into_iter().map(|v| activation.apply(v)));
    }
    Tensor::new(out_shape(x, rows, fan_out), out)
}

pub fn dense_backward(
    x: &Tensor,
    w: &Tensor,
    b: &Tensor,
    output: &Tensor,
    grad_output: &Tensor,
    activation: Activation,
) -> Result<DenseGrads> {
    let (rows, fan_in, fan_out) = dims(x, w, b)?;
    if output.len() != rows * fan_out || grad_output.len() != rows * fan_out {
        return Err(Error::Shape("dense backward: output/grad size mismatch".into()));
    }
    let mut gx = vec![0.0; rows * fan_in];
    let mut gw = vec![0.0; fan_in * fan_out];
    let mut gb = vec![0.0; fan_out];
    let mut dpre = vec![0.0; fan_out];
    for r in 0..rows {
        let xr = &x.data()[r * fan_in..(r + 1) * fan_in];
        for j in 0..fan_out {
            let idx = r * fan_out + j;
            dpre[j] = grad_output.data()[idx] * activation.derivative_from_output(output.data()[idx]);
            gb[j] += dpre[j];
        }
        for (i, &xv) in xr.iter().enumerate() {
            let wrow = &w.data()[i * fan_out..(i + 1) * fan_out];
            gx[r * fan_in + i] = wrow.iter().zip(&dpre).map(|(a, b)| a * b).sum();
            if xv != 0.0 {
                for (g, &d) in gw[i * fan_out..(i + 1) * fan_out].iter_mut().zip(&dpre) {
                    *g += xv * d;
                }
            }
        }
    }
    Ok(DenseGrads {
        input: Tensor::new(x.shape().to_vec(), gx)?,
        weight: Tensor::new(vec![fan_in, fan_out], gw)?,
        bias: Tensor::new(vec![fan_out], gb)?,
    })
}
