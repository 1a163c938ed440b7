//! Temporal convolution applied independently to every electrode.
//!
//! Cross-correlation with a length-`K` kernel (odd `K`), stride 1, zero
//! "same" padding, followed by ReLU. Input is `N x T x 1`, kernel is
//! `K x 1 x F`, output is `N x T x F`.

use super::Tensor;
use crate::error::{Error, Result};

pub struct ConvGrads {
    pub input: Tensor,
    pub kernel: Tensor,
    pub bias: Tensor,
}

fn check(x: &Tensor, kernel: &Tensor, bias: &Tensor) -> Result<(usize, usize, usize, usize)> {
    let (n, t) = match x.shape() {
        [n, t, 1] | [n, t] => (*n, *t),
        s => return Err(Error::Shape(format!("conv input must be N x T x 1, got {s:?}"))),
    };
    let (k, f) = check_params(kernel, bias)?;
    Ok((n, t, k, f))
}

fn check_params(kernel: &Tensor, bias: &Tensor) -> Result<(usize, usize)> {
    let (k, f) = match kernel.shape() {
        [k, 1, f] => (*k, *f),
        s => return Err(Error::Shape(format!("conv kernel must be K x 1 x F, got {s:?}"))),
    };
    if k % 2 == 0 {
        return Err(Error::Shape(format!("kernel size must be odd, got {k}")));
    }
    bias.expect_shape("conv bias", &[f])?;
    Ok((k, f))
}

/// Pre-activations of one channel at time `t` into `acc` (length F).
#[inline]
fn pre_activation(row: &[f64], t: usize, w: &[f64], b: &[f64], k: usize, acc: &mut [f64]) {
    let f = b.len();
    let half = k / 2;
    acc.copy_from_slice(b);
    let lo = half.saturating_sub(t);
    let hi = k.min(row.len() + half - t);
    for tap in lo..hi {
        let xv = row[t + tap - half];
        let wk = &w[tap * f..(tap + 1) * f];
        for (a, &wv) in acc.iter_mut().zip(wk) {
            *a += wv * xv;
        }
    }
}

pub fn conv1d_td(x: &Tensor, kernel: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (n, t, k, f) = check(x, kernel, bias)?;
    let mut out = vec![0.0; n * t * f];
    for (row, out_row) in x.data().chunks_exact(t).zip(out.chunks_exact_mut(t * f)) {
        for (ti, acc) in out_row.chunks_exact_mut(f).enumerate() {
            pre_activation(row, ti, kernel.data(), bias.data(), k, acc);
            acc.iter_mut().for_each(|v| *v = v.max(0.0));
        }
    }
    Tensor::new(vec![n, t, f], out)
}

/// Gradients given the forward `output` (post-ReLU) and `grad_output`.
pub fn conv1d_td_backward(
    x: &Tensor,
    kernel: &Tensor,
    bias: &Tensor,
    output: &Tensor,
    grad_output: &Tensor,
) -> Result<ConvGrads> {
    let (n, t, k, f) = check(x, kernel, bias)?;
    output.expect_shape("conv output", &[n, t, f])?;
    grad_output.expect_shape("conv grad", &[n, t, f])?;
    let half = k / 2;
    let w = kernel.data();
    let mut gx = vec![0.0; n * t];
    let mut gw = vec![0.0; k * f];
    let mut gb = vec![0.0; f];
    let mut g = vec![0.0; f];
    for c in 0..n {
        let row = &x.data()[c * t..(c + 1) * t];
        for ti in 0..t {
            let base = (c * t + ti) * f;
            for j in 0..f {
                g[j] = if output.data()[base + j] > 0.0 {
                    grad_output.data()[base + j]
                } else {
                    0.0
                };
                gb[j] += g[j];
            }
            accumulate(row, ti, w, &g, k, half, &mut gw, Some(&mut gx[c * t..(c + 1) * t]));
        }
    }
    Ok(ConvGrads {
        input: Tensor::new(x.shape().to_vec(), gx)?,
        kernel: Tensor::new(vec![k, 1, f], gw)?,
        bias: Tensor::new(vec![f], gb)?,
    })
}

#[inline]
#[allow(clippy::too_many_arguments)]
fn accumulate(
    row: &[f64],
    t: usize,
    w: &[f64],
    g: &[f64],
    k: usize,
    half: usize,
    gw: &mut [f64],
    gx: Option<&mut [f64]>,
) {
    let f = g.len();
    let lo = half.saturating_sub(t);
    let hi = k.min(row.len() + half - t);
    for tap in lo..hi {
        let xv = row[t + tap - half];
        for (a, &gv) in gw[tap * f..(tap + 1) * f].iter_mut().zip(g) {
            *a += gv * xv;
        }
    }
    if let Some(gx) = gx {
        for tap in lo..hi {
            let wk = &w[tap * f..(tap + 1) * f];
            gx[t + tap - half] += wk.iter().zip(g).map(|(a, b)| a * b).sum::<f64>();
        }
    }
}

/// Convolution, ReLU and mean over time in one pass: returns `N x F`.
///
/// Same result as `global_avg_pool_time(conv1d_td(..))` without
/// materialising the `N x T x F` activation.
pub fn conv_pool_forward(x: &[f64], channels: usize, samples: usize, kernel: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (k, f) = check_params(kernel, bias)?;
    let (n, t) = (channels, samples);
    if x.len() != n * t {
        return Err(Error::Shape(format!("{} samples for {n}x{t} input", x.len())));
    }
    let mut z = vec![0.0; n * f];
    let mut acc = vec![0.0; f];
    let inv_t = 1.0 / t as f64;
    for (row, zr) in x.chunks_exact(t).zip(z.chunks_exact_mut(f)) {
        for ti in 0..t {
            pre_activation(row, ti, kernel.data(), bias.data(), k, &mut acc);
            for (s, &a) in zr.iter_mut().zip(&acc) {
                *s += a.max(0.0);
            }
        }
        zr.iter_mut().for_each(|v| *v *= inv_t);
    }
    Tensor::new(vec![n, f], z)
}

/// Backward of [`conv_pool_forward`]. Accumulates into `grad_kernel` and
/// `grad_bias`; input gradients are written to `grad_input` when given.
#[allow(clippy::too_many_arguments)]
pub fn conv_pool_backward(
    x: &[f64],
    channels: usize,
    samples: usize,
    kernel: &Tensor,
    bias: &Tensor,
    grad_z: &Tensor,
    grad_kernel: &mut Tensor,
    grad_bias: &mut Tensor,
    mut grad_input: Option<&mut [f64]>,
) -> Result<()> {
    let (n, t) = (channels, samples);
    let (k, f) = check_params(kernel, bias)?;
    grad_z.expect_shape("pooled grad", &[n, f])?;
    grad_kernel.expect_shape("kernel grad", kernel.shape())?;
    grad_bias.expect_shape("bias grad", &[f])?;
    if x.len() != n * t {
        return Err(Error::Shape(format!("{} samples for {n}x{t} input", x.len())));
    }
    let half = k / 2;
    let inv_t = 1.0 / t as f64;
    let mut acc = vec![0.0; f];
    let mut g = vec![0.0; f];
    let w = kernel.data();
    for c in 0..n {
        let row = &x[c * t..(c + 1) * t];
        let gz = &grad_z.data()[c * f..(c + 1) * f];
        if gz.iter().all(|&v| v == 0.0) {
            continue;
        }
        for ti in 0..t {
            pre_activation(row, ti, w, bias.data(), k, &mut acc);
            let mut any = false;
            for j in 0..f {
                g[j] = if acc[j] > 0.0 { gz[j] * inv_t } else { 0.0 };
                any |= g[j] != 0.0;
            }
            if !any {
                continue;
            }
            for (b, &gv) in grad_bias.data_mut().iter_mut().zip(&g) {
                *b += gv;
            }
            let gx = grad_input.as_deref_mut().map(|gi| &mut gi[c * t..(c + 1) * t]);
            accumulate(row, ti, w, &g, k, half, grad_kernel.data_mut(), gx);
        }
    }
    Ok(())
}
