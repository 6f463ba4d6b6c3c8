//! Loss functions over combined scores and their subgradients.
//!
//! The hinge loss penalizes the margin between the true class and the most
//! offending wrong class when it falls below one; the least-squares loss
//! measures squared error against a one-hot target. The empirical risk is
//! the per-instance average over a level-1 dataset.

use crate::combiner::{CombinerModel, argmax};
use crate::error::{Error, Result};
use crate::profile::{LevelOneDataset, ScoreProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Hinge,
    LeastSquares,
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LossKind::Hinge => f.write_str("hinge"),
            LossKind::LeastSquares => f.write_str("ls"),
        }
    }
}

fn check_scores(combined: &[f64], label: usize) -> Result<()> {
    if combined.len() < 2 {
        return Err(Error::InvalidArgument(
            "loss needs at least 2 classes (no competing class otherwise)".into(),
        ));
    }
    if label >= combined.len() {
        return Err(Error::InvalidArgument(format!(
            "label {label} out of range for {} classes",
            combined.len()
        )));
    }
    Ok(())
}

/// Index of the most offending wrong class: the maximal score among classes
/// other than `label`, lowest index on ties.
fn most_offending(combined: &[f64], label: usize) -> usize {
    let mut best = if label == 0 { 1 } else { 0 };
    for (n, &v) in combined.iter().enumerate() {
        if n != label && v > combined[best] {
            best = n;
        }
    }
    best
}

/// Multiclass hinge term `(1 - r_y + max_{n != y} r_n)_+`.
pub fn hinge_term(combined: &[f64], label: usize) -> Result<f64> {
    check_scores(combined, label)?;
    let rival = most_offending(combined, label);
    Ok((1.0 - combined[label] + combined[rival]).max(0.0))
}

/// Squared error against the one-hot target for `label`.
pub fn least_squares_term(combined: &[f64], label: usize) -> Result<f64> {
    check_scores(combined, label)?;
    Ok(combined
        .iter()
        .enumerate()
        .map(|(n, &r)| {
            let t = if n == label { 1.0 } else { 0.0 };
            (r - t) * (r - t)
        })
        .sum())
}

pub fn loss_term(kind: LossKind, combined: &[f64], label: usize) -> Result<f64> {
    match kind {
        LossKind::Hinge => hinge_term(combined, label),
        LossKind::LeastSquares => least_squares_term(combined, label),
    }
}

/// Average loss over the dataset.
pub fn empirical_risk(
    model: &CombinerModel,
    dataset: &LevelOneDataset,
    kind: LossKind,
) -> Result<f64> {
    let mut total = 0.0;
    for (profile, label) in dataset.iter() {
        total += loss_term(kind, &model.combine(profile)?, label)?;
    }
    Ok(total / dataset.len() as f64)
}

/// A subgradient of the averaged loss at `model`, shaped like `model`.
///
/// Active hinge terms contribute +score components on the most offending
/// wrong class (lowest index on ties) and -score components on the true
/// class; inactive terms contribute nothing.
pub fn risk_subgradient(
    model: &CombinerModel,
    dataset: &LevelOneDataset,
    kind: LossKind,
) -> Result<CombinerModel> {
    let mut grad = CombinerModel::zeros(
        model.kind(),
        model.classifier_count(),
        model.class_count().unwrap_or(dataset.class_count()),
    );
    let class_count = dataset.class_count();
    let mut coeffs = vec![0.0; class_count];
    for (profile, label) in dataset.iter() {
        let combined = model.combine(profile)?;
        for c in coeffs.iter_mut() {
            *c = 0.0;
        }
        match kind {
            LossKind::Hinge => {
                check_scores(&combined, label)?;
                let rival = most_offending(&combined, label);
                if 1.0 - combined[label] + combined[rival] > 0.0 {
                    coeffs[rival] += 1.0;
                    coeffs[label] -= 1.0;
                } else {
                    continue;
                }
            }
            LossKind::LeastSquares => {
                check_scores(&combined, label)?;
                for (n, c) in coeffs.iter_mut().enumerate() {
                    let t = if n == label { 1.0 } else { 0.0 };
                    *c = 2.0 * (combined[n] - t);
                }
            }
        }
        accumulate_score_gradient(&mut grad, profile, &coeffs);
    }
    grad.scale(1.0 / dataset.len() as f64);
    Ok(grad)
}

/// Adds the chain-rule contribution of one instance: `coeffs[n]` is the
/// derivative of the loss term with respect to the combined score of class n.
fn accumulate_score_gradient(grad: &mut CombinerModel, profile: &ScoreProfile, coeffs: &[f64]) {
    match grad {
        CombinerModel::Ws { weights } => {
            for (m, w) in weights.iter_mut().enumerate() {
                let block = profile.block(m);
                *w += coeffs.iter().zip(block).map(|(c, p)| c * p).sum::<f64>();
            }
        }
        CombinerModel::Cws { weights, classifier_count, class_count } => {
            for m in 0..*classifier_count {
                let block = profile.block(m);
                let row = &mut weights[m * *class_count..(m + 1) * *class_count];
                for (n, w) in row.iter_mut().enumerate() {
                    *w += coeffs[n] * block[n];
                }
            }
        }
        CombinerModel::Lsg { weights, bias, .. } => {
            let scores = profile.scores();
            let width = scores.len();
            for (n, &c) in coeffs.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let row = &mut weights[n * width..(n + 1) * width];
                for (w, &s) in row.iter_mut().zip(scores) {
                    *w += c * s;
                }
                bias[n] += c;
            }
        }
    }
}

/// Fraction of instances whose prediction matches the label.
pub fn dataset_accuracy(model: &CombinerModel, dataset: &LevelOneDataset) -> Result<f64> {
    let mut correct = 0usize;
    for (profile, label) in dataset.iter() {
        let scores = model.combine(profile)?;
        if argmax(&scores) == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}
