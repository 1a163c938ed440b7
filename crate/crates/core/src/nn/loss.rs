use crate::error::{Error, Result};

/// Probabilities are clipped to `[PROB_CLIP, 1 - PROB_CLIP]` before the log.
pub const PROB_CLIP: f64 = 1e-7;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy and its gradient with respect to `p`.
pub fn bce_loss(p: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>)> {
    bce_loss_weighted(p, y, None)
}

/// BCE with optional per-sample weights (the mean is taken over samples, not weights).
/// The gradient is exact for the clipped function, so it vanishes outside the clip range.
pub fn bce_loss_weighted(p: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<(f64, Vec<f64>)> {
    if p.len() != y.len() || weights.is_some_and(|w| w.len() != p.len()) {
        return Err(Error::Shape(format!(
            "bce on {} probabilities and {} labels",
            p.len(),
            y.len()
        )));
    }
    if p.is_empty() {
        return Err(Error::Shape("bce on an empty batch".into()));
    }
    let m = p.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(p.len());
    for (i, (&pi, &yi)) in p.iter().zip(y).enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        let pc = pi.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
        loss -= w * (yi * pc.ln() + (1.0 - yi) * (1.0 - pc).ln());
        let inside = pi > PROB_CLIP && pi < 1.0 - PROB_CLIP;
        grad.push(if inside {
            -w * (yi / pc - (1.0 - yi) / (1.0 - pc)) / m
        } else {
            0.0
        });
    }
    Ok((loss / m, grad))
}
