//! Regularization functions and their proximal operators.
//!
//! * `L2` — squared l2 norm of all weights; smooth, handled as a gradient
//!   term by the solver.
//! * `L1` — sum of absolute weights; prox is the elementwise soft threshold.
//! * `GroupL1L2` — sum of per-classifier group norms (CWS rows, LSG blocks);
//!   prox is block soft thresholding, which zeroes whole groups at once.
//!
//! Bias terms are never regularized or shrunk.

use crate::combiner::{CombinerKind, CombinerModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegKind {
    L2,
    L1,
    GroupL1L2,
}

impl std::fmt::Display for RegKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegKind::L2 => f.write_str("l2"),
            RegKind::L1 => f.write_str("l1"),
            RegKind::GroupL1L2 => f.write_str("group"),
        }
    }
}

impl RegKind {
    /// Group sparsity needs groups of more than one weight; WS groups are
    /// singletons, where it would silently collapse to L1.
    pub fn valid_for(self, combiner: CombinerKind) -> bool {
        !(self == RegKind::GroupL1L2 && combiner == CombinerKind::Ws)
    }
}

fn check_combination(model: &CombinerModel, kind: RegKind) -> Result<()> {
    if kind.valid_for(model.kind()) {
        Ok(())
    } else {
        Err(Error::InvalidRegCombination { kind, combiner: model.kind() })
    }
}

/// Value of the regularization function at `model` (bias excluded).
pub fn value(model: &CombinerModel, kind: RegKind) -> Result<f64> {
    check_combination(model, kind)?;
    let weights = model.weights();
    Ok(match kind {
        RegKind::L2 => weights.iter().map(|w| w * w).sum(),
        RegKind::L1 => weights.iter().map(|w| w.abs()).sum(),
        RegKind::GroupL1L2 => model.group_norms().iter().sum(),
    })
}

/// Proximal operator of `threshold * R` applied to the model weights.
///
/// `threshold` is the solver's step size times lambda. L2 is excluded: the
/// solver folds it into the smooth gradient step instead.
pub fn prox(model: &CombinerModel, kind: RegKind, threshold: f64) -> Result<CombinerModel> {
    check_combination(model, kind)?;
    if threshold < 0.0 {
        return Err(Error::NegativeProxStep(threshold));
    }
    if kind == RegKind::L2 {
        return Err(Error::InvalidArgument(
            "prox is only defined for the nonsmooth regularizers (l1, group)".into(),
        ));
    }
    let mut out = model.clone();
    match kind {
        RegKind::L1 => {
            for w in out.weights_mut() {
                *w = soft_threshold(*w, threshold);
            }
        }
        RegKind::GroupL1L2 => {
            let runs = model.group_runs();
            let norms = model.group_norms();
            let weights = out.weights_mut();
            for (group_runs, &norm) in runs.iter().zip(&norms) {
                let factor = if norm > threshold { 1.0 - threshold / norm } else { 0.0 };
                for run in group_runs {
                    for w in &mut weights[run.clone()] {
                        *w *= factor;
                    }
                }
            }
        }
        RegKind::L2 => unreachable!(),
    }
    Ok(out)
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}
