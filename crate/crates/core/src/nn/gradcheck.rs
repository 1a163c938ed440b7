//! Central finite-difference verification of analytic gradients.

use serde::Serialize;

use super::ParamSet;

const STEP: f64 = 1e-5;
const DENOM_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockError {
    pub name: String,
    pub max_rel_error: f64,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradcheckReport {
    pub tolerance: f64,
    pub blocks: Vec<BlockError>,
    pub passed: bool,
}

impl GradcheckReport {
    pub fn max_error(&self) -> f64 {
        self.blocks.iter().map(|b| b.max_rel_error).fold(0.0, f64::max)
    }
}

/// `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(DENOM_FLOOR)
}

/// Compare `analytic` against central differences of `f` at `params` with
/// step `1e-5`, one scalar at a time.
pub fn gradcheck<F>(params: &ParamSet, analytic: &ParamSet, f: F, tolerance: f64) -> GradcheckReport
where
    F: Fn(&ParamSet) -> f64,
{
    assert!(params.same_layout(analytic), "gradient layout differs from parameters");
    let mut probe = params.clone();
    let mut blocks = Vec::with_capacity(params.len());
    for b in 0..params.len() {
        let mut worst = BlockError {
            name: params.blocks()[b].name.clone(),
            max_rel_error: 0.0,
            worst_index: 0,
            analytic: 0.0,
            numeric: 0.0,
        };
        for i in 0..params.block(b).len() {
            let original = params.block(b).data()[i];
            probe.block_mut(b).data_mut()[i] = original + STEP;
            let up = f(&probe);
            probe.block_mut(b).data_mut()[i] = original - STEP;
            let down = f(&probe);
            probe.block_mut(b).data_mut()[i] = original;
            let numeric = (up - down) / (2.0 * STEP);
            let a = analytic.block(b).data()[i];
            let err = relative_error(a, numeric);
            if err > worst.max_rel_error || err.is_nan() {
                worst.max_rel_error = err;
                worst.worst_index = i;
                worst.analytic = a;
                worst.numeric = numeric;
            }
        }
        blocks.push(worst);
    }
    let passed = blocks.iter().all(|b| b.max_rel_error < tolerance);
    GradcheckReport {
        tolerance,
        blocks,
        passed,
    }
}
