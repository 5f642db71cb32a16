//! Central finite-difference check of [`loss_and_backward`].

use super::model::{Model, Role};
use super::network::{cross_entropy, forward, loss_and_backward};
use super::FeatureMap;
use crate::error::{Error, Result};

/// Gradients smaller than this are compared in absolute terms: the relative
/// error denominator never drops below it.
pub const RELATIVE_FLOOR: f64 = 1e-8;

/// Worst disagreement inside one parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCheck {
    pub role: Role,
    pub checked: usize,
    /// Coordinates whose perturbation crossed a relu or max-pool switch;
    /// the difference quotient is meaningless there, so they are left out.
    pub skipped: usize,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub worst_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub epsilon: f64,
    pub tolerance: f64,
    pub loss: f64,
    pub blocks: Vec<BlockCheck>,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.blocks.iter().map(|b| b.max_rel_error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_rel_error() < self.tolerance
    }
}

/// `|a - n| / max(|a|, |n|, RELATIVE_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

/// Compares every analytic partial derivative with
/// `(f(θ + ε) − f(θ − ε)) / 2ε`, block by block. Coordinates where either
/// probe lands on a different piece of the piecewise-smooth loss are
/// counted in [`BlockCheck::skipped`] instead of compared.
pub fn grad_check(m: &Model, x: &FeatureMap, label: usize, epsilon: f64, tolerance: f64) -> Result<GradCheckReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let (base_loss, grads) = loss_and_backward(m, x, label)?;
    let base = forward(m, x)?;
    let mut probe = m.clone();
    let mut blocks = Vec::with_capacity(m.blocks().len());
    for block in m.blocks() {
        let mut check = BlockCheck { role: block.role, checked: 0, skipped: 0, max_rel_error: 0.0, max_abs_error: 0.0, worst_index: 0 };
        for i in block.range() {
            let original = probe.params[i];
            probe.params[i] = original + epsilon;
            let plus = forward(&probe, x)?;
            probe.params[i] = original - epsilon;
            let minus = forward(&probe, x)?;
            probe.params[i] = original;
            if !(base.same_branches(&plus) && base.same_branches(&minus)) {
                check.skipped += 1;
                continue;
            }
            let (plus, minus) = (cross_entropy(&plus.logits, label), cross_entropy(&minus.logits, label));
            let numeric = (plus - minus) / (2.0 * epsilon);
            let analytic = grads.values[i];
            let rel = relative_error(analytic, numeric);
            if rel > check.max_rel_error {
                check.max_rel_error = rel;
                check.worst_index = i - block.offset;
            }
            check.max_abs_error = check.max_abs_error.max((analytic - numeric).abs());
            check.checked += 1;
        }
        blocks.push(check);
    }
    Ok(GradCheckReport { epsilon, tolerance, loss: base_loss, blocks })
}
