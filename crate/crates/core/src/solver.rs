//! Combiner weight training by proximal subgradient descent.
//!
//! The objective is the average loss plus `lambda` times the regularizer.
//! Each iteration takes a subgradient step on the loss (with the L2 term
//! folded into the step as a smooth gradient) followed, for the nonsmooth
//! regularizers, by their proximal operator. Steps shrink as
//! `step0 / sqrt(t)`; the best iterate seen is returned, so the recorded
//! trace of running-best objectives is nonincreasing by construction.

use crate::combiner::{CombinerKind, CombinerModel};
use crate::error::{Error, Result};
use crate::loss::{self, LossKind};
use crate::profile::LevelOneDataset;
use crate::reg::{self, RegKind};
use crate::seed;
use crate::split;

/// How often the running-average candidates are scored against the best.
const AVERAGE_EVAL_PERIOD: usize = 10;

/// Solver controls plus the combiner/loss/regularizer selection.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub combiner: CombinerKind,
    pub loss: LossKind,
    pub reg: RegKind,
    pub lambda: f64,
    pub max_iters: usize,
    pub step0: f64,
    /// Relative best-objective improvement below which training stops.
    pub tol: f64,
    /// Length of the improvement window the stopping rule looks across.
    pub stop_window: usize,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(combiner: CombinerKind, loss: LossKind, reg: RegKind) -> Self {
        Self {
            combiner,
            loss,
            reg,
            lambda: 0.0,
            max_iters: 2000,
            step0: 1.0,
            tol: 1e-7,
            stop_window: 50,
            seed: 0,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda {} must be >= 0", self.lambda)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
        }
        if !(self.step0 > 0.0) {
            return Err(Error::InvalidArgument(format!("step0 {} must be > 0", self.step0)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol {} must be > 0", self.tol)));
        }
        if self.stop_window == 0 {
            return Err(Error::InvalidArgument("stop window must be >= 1".into()));
        }
        if !self.reg.valid_for(self.combiner) {
            return Err(Error::InvalidRegCombination { kind: self.reg, combiner: self.combiner });
        }
        Ok(())
    }
}

/// The lambda values tried by cross-validated model selection.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid(Vec<f64>);

impl LambdaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("lambda grid must be nonempty".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument("lambda grid values must be >= 0".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("lambda grid must be strictly increasing".into()));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self(vec![
            1e-11, 1e-9, 1e-7, 1e-5, 1e-3, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 10.0,
        ])
    }
}

fn model_norm(model: &CombinerModel) -> f64 {
    let mut sq: f64 = model.weights().iter().map(|w| w * w).sum();
    if let Some(bias) = model.bias() {
        sq += bias.iter().map(|b| b * b).sum::<f64>();
    }
    sq.sqrt()
}

fn check_model_config(model: &CombinerModel, config: &TrainConfig) -> Result<()> {
    if model.kind() != config.combiner {
        return Err(Error::InvalidArgument(format!(
            "model is {} but the config trains {}",
            model.kind(),
            config.combiner
        )));
    }
    Ok(())
}

/// Full objective: average loss plus `lambda` times the regularizer.
pub fn objective(
    model: &CombinerModel,
    dataset: &LevelOneDataset,
    config: &TrainConfig,
) -> Result<f64> {
    config.validate()?;
    check_model_config(model, config)?;
    let risk = loss::empirical_risk(model, dataset, config.loss)?;
    Ok(risk + config.lambda * reg::value(model, config.reg)?)
}

/// Trains a combiner from the zero model; returns the best candidate seen
/// and the trace of running-best objective values (one entry per iteration,
/// plus the starting value).
///
/// Candidates are the proximal iterates themselves plus, periodically, a
/// suffix average of the iterates (restarted at each power-of-two iteration)
/// and its prox'd image. Raw iterates of a subgradient method stall at an
/// objective excess proportional to the step size on polyhedral (hinge)
/// objectives, while the suffix average keeps converging without being
/// dragged by the early transient; the prox'd average restores the exact
/// group zeros that plain averaging smears out.
pub fn train(dataset: &LevelOneDataset, config: &TrainConfig) -> Result<(CombinerModel, Vec<f64>)> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut current = CombinerModel::zeros(
        config.combiner,
        dataset.classifier_count(),
        dataset.class_count(),
    );
    let mut average = current.clone();
    let mut average_len = 0u64;
    let mut best = current.clone();
    let mut best_objective = objective(&current, dataset, config)?;
    let mut trace = vec![best_objective];

    for iteration in 1..=config.max_iters {
        let grad = loss::risk_subgradient(&current, dataset, config.loss)?;
        // Least-squares subgradients are unbounded in the iterate, so the
        // step is normalized by the subgradient norm once it exceeds one;
        // hinge subgradients on posterior scores stay below that.
        let grad_norm = model_norm(&grad);
        let step = config.step0 / ((iteration as f64).sqrt() * grad_norm.max(1.0));
        current.add_scaled(-step, &grad)?;
        match config.reg {
            RegKind::L2 => {
                // Exact backward step for lambda * |w|^2: contractive for
                // any step size, unlike the linearized weight decay.
                let shrink = 1.0 / (1.0 + 2.0 * step * config.lambda);
                for w in current.weights_mut() {
                    *w *= shrink;
                }
            }
            RegKind::L1 | RegKind::GroupL1L2 => {
                current = reg::prox(&current, config.reg, step * config.lambda)?;
            }
        }
        let value = objective(&current, dataset, config)?;
        if value < best_objective {
            best_objective = value;
            best = current.clone();
        }

        if (iteration as u64).is_power_of_two() {
            average_len = 0;
        }
        average_len += 1;
        // average += (current - average) / average_len
        average.scale(1.0 - 1.0 / average_len as f64);
        average.add_scaled(1.0 / average_len as f64, &current)?;
        let stopping = trace.len() > config.stop_window && {
            let before = trace[trace.len() - config.stop_window];
            (before - best_objective) / before.abs().max(1e-12) < config.tol
        };
        if iteration % AVERAGE_EVAL_PERIOD == 0 || iteration == config.max_iters || stopping {
            let value = objective(&average, dataset, config)?;
            if value < best_objective {
                best_objective = value;
                best = average.clone();
            }
            if matches!(config.reg, RegKind::L1 | RegKind::GroupL1L2) {
                let proxed = reg::prox(&average, config.reg, step * config.lambda)?;
                let value = objective(&proxed, dataset, config)?;
                if value < best_objective {
                    best_objective = value;
                    best = proxed;
                }
            }
        }
        trace.push(best_objective);
        if stopping {
            break;
        }
    }
    Ok((best, trace))
}

/// Picks the grid lambda with the best 2-fold cross-validated accuracy.
/// Folds are stratified and seeded by `config.seed`; ties go to the largest
/// lambda. Returns the winner and the per-lambda mean accuracies.
pub fn lambda_search(
    dataset: &LevelOneDataset,
    config: &TrainConfig,
    grid: &LambdaGrid,
) -> Result<(f64, Vec<f64>)> {
    config.validate()?;
    let mut rng = seed::rng_for(config.seed, "lambda-cv", 0);
    let (half_a, half_b) = split::stratified_halves(dataset.labels(), dataset.class_count(), &mut rng)?;
    let folds = [
        (dataset.subset(&half_a)?, dataset.subset(&half_b)?),
        (dataset.subset(&half_b)?, dataset.subset(&half_a)?),
    ];

    let mut accuracies = Vec::with_capacity(grid.values().len());
    let mut best = (grid.values()[0], f64::NEG_INFINITY);
    for &lambda in grid.values() {
        let candidate = TrainConfig { lambda, ..config.clone() };
        let mut accuracy = 0.0;
        for (train_fold, test_fold) in &folds {
            let (model, _) = train(train_fold, &candidate)?;
            accuracy += loss::dataset_accuracy(&model, test_fold)?;
        }
        accuracy /= folds.len() as f64;
        accuracies.push(accuracy);
        if accuracy >= best.1 {
            best = (lambda, accuracy);
        }
    }
    Ok((best.0, accuracies))
}

/// Per-grid-point summary emitted by the lambda sweep: the cross-validated
/// accuracy and the classifiers selected by a full-data refit.
pub fn lambda_sweep(
    dataset: &LevelOneDataset,
    config: &TrainConfig,
    grid: &LambdaGrid,
    selected_rel_tol: f64,
) -> Result<Vec<(f64, f64, usize)>> {
    let (_, accuracies) = lambda_search(dataset, config, grid)?;
    let mut rows = Vec::with_capacity(grid.values().len());
    for (&lambda, &accuracy) in grid.values().iter().zip(&accuracies) {
        let candidate = TrainConfig { lambda, ..config.clone() };
        let (model, _) = train(dataset, &candidate)?;
        let selected = crate::eval::selected_count(&model, selected_rel_tol);
        rows.push((lambda, accuracy, selected));
    }
    Ok(rows)
}

/// Trains a plain linear classifier on raw feature rows by reusing the
/// combiner solver: each input column becomes one classifier block with the
/// value replicated across classes, plus a constant column standing in for
/// the bias, so a CWS model is exactly a linear map on the inputs.
pub(crate) fn train_linear_on_features(
    rows: &[Vec<f64>],
    labels: &[usize],
    class_count: usize,
    loss: LossKind,
    l2_lambda: f64,
    seed: u64,
) -> Result<LinearScorer> {
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let input_dim = rows[0].len();
    let dataset = lift_features(rows, labels, class_count)?;
    let config = TrainConfig {
        combiner: CombinerKind::Cws,
        loss,
        reg: RegKind::L2,
        lambda: l2_lambda,
        max_iters: 2000,
        step0: 1.0,
        tol: 1e-7,
        stop_window: 50,
        seed,
    };
    let (model, _) = train(&dataset, &config)?;
    match model {
        CombinerModel::Cws { weights, .. } => Ok(LinearScorer { weights, input_dim, class_count }),
        _ => unreachable!(),
    }
}

fn lift_features(rows: &[Vec<f64>], labels: &[usize], class_count: usize) -> Result<LevelOneDataset> {
    let input_dim = rows[0].len();
    let mut profiles = Vec::with_capacity(rows.len());
    for row in rows {
        if row.len() != input_dim {
            return Err(Error::InvalidArgument("ragged feature rows".into()));
        }
        let mut scores = Vec::with_capacity((input_dim + 1) * class_count);
        for &x in row {
            for _ in 0..class_count {
                scores.push(x);
            }
        }
        scores.extend(std::iter::repeat(1.0).take(class_count));
        profiles.push(crate::profile::ScoreProfile::new(input_dim + 1, class_count, scores)?);
    }
    LevelOneDataset::new(profiles, labels.to_vec())
}

/// Linear multiclass scorer over raw features (weights include a bias column).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LinearScorer {
    /// Row-major (input_dim + 1) x class_count; last row is the bias.
    weights: Vec<f64>,
    input_dim: usize,
    class_count: usize,
}

impl LinearScorer {
    pub(crate) fn margins(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::InvalidArgument(format!(
                "feature vector has {} values, model expects {}",
                x.len(),
                self.input_dim
            )));
        }
        let mut out = vec![0.0; self.class_count];
        for (j, &v) in x.iter().enumerate() {
            let row = &self.weights[j * self.class_count..(j + 1) * self.class_count];
            for (n, o) in out.iter_mut().enumerate() {
                *o += row[n] * v;
            }
        }
        let bias = &self.weights[self.input_dim * self.class_count..];
        for (n, o) in out.iter_mut().enumerate() {
            *o += bias[n];
        }
        Ok(out)
    }

}
