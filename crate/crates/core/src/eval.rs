//! 5x2 cross-validation harness, classifier-selection counting, and the
//! one-tailed Wilcoxon signed-rank test.

use crate::combiner::{equal_weights, CombinerModel};
use crate::error::{Error, Result};
use crate::profile::FeatureDataset;
use crate::seed;
use crate::solver::{lambda_search, train, LambdaGrid, TrainConfig};
use crate::split;
use crate::stacking::{fit_ensemble, internal_cv_scores, EnsembleSpec};

/// Relative tolerance under which a weight group counts as zero.
///
/// The nonsmooth proximal steps produce exact zeros, but L2 training never
/// does; a relative cut keeps selection counts well defined for every
/// regularizer.
pub const SELECTED_REL_TOL: f64 = 1e-6;

/// Number of classifiers with a nonzero weight group: |u_m| for WS, row
/// norms for CWS, block Frobenius norms for LSG, counted above
/// `rel_tol * (1 + max group norm)`.
pub fn selected_count(model: &CombinerModel, rel_tol: f64) -> usize {
    let norms = model.group_norms();
    let max = norms.iter().cloned().fold(0.0, f64::max);
    norms.iter().filter(|&&n| n > rel_tol * (1.0 + max)).count()
}

/// How the regularization weight is chosen per training stack.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaChoice {
    Fixed(f64),
    CrossValidated(LambdaGrid),
}

/// The combiner under evaluation: the untrained equal-weights baseline or a
/// trained configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum CombinerMethod {
    EqualWeights,
    Trained { config: TrainConfig, lambda: LambdaChoice },
}

/// Per-stack outcomes of a 5x2 cross-validation run.
#[derive(Debug, Clone, PartialEq)]
pub struct StackResults {
    errors_pct: Vec<f64>,
    selected: Vec<usize>,
}

impl StackResults {
    pub fn new(errors_pct: Vec<f64>, selected: Vec<usize>) -> Result<Self> {
        if errors_pct.len() != 10 || selected.len() != 10 {
            return Err(Error::InvalidArgument(format!(
                "expected 10 stacks, got {} errors and {} counts",
                errors_pct.len(),
                selected.len()
            )));
        }
        if errors_pct.iter().any(|e| !(0.0..=100.0).contains(e)) {
            return Err(Error::InvalidArgument("stack errors must lie in [0, 100]".into()));
        }
        Ok(Self { errors_pct, selected })
    }

    pub fn errors_pct(&self) -> &[f64] {
        &self.errors_pct
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn mean_error(&self) -> f64 {
        self.errors_pct.iter().sum::<f64>() / self.errors_pct.len() as f64
    }

    /// Sample standard deviation (n-1 convention).
    pub fn std_error(&self) -> f64 {
        let mean = self.mean_error();
        let ss: f64 = self.errors_pct.iter().map(|e| (e - mean) * (e - mean)).sum();
        (ss / (self.errors_pct.len() - 1) as f64).sqrt()
    }

    pub fn mean_selected(&self) -> f64 {
        self.selected.iter().sum::<usize>() as f64 / self.selected.len() as f64
    }
}

/// Five seeded stratified 50/50 splits; each half serves once as training
/// (level-1 generation, lambda selection, combiner training) and once as
/// test, giving 10 stacks. Deterministic given the master seed.
pub fn five_by_two(
    data: &FeatureDataset,
    ensemble: &EnsembleSpec,
    method: &CombinerMethod,
    master_seed: u64,
) -> Result<StackResults> {
    let mut errors = Vec::with_capacity(10);
    let mut selected = Vec::with_capacity(10);
    for iteration in 0..5u64 {
        let mut rng = seed::rng_for(master_seed, "five-by-two-split", iteration);
        let (half_a, half_b) =
            split::stratified_halves(data.labels(), data.class_count(), &mut rng)?;
        for (half, (train_idx, test_idx)) in
            [(&half_a, &half_b), (&half_b, &half_a)].into_iter().enumerate()
        {
            let stack = 2 * iteration + half as u64;
            let stack_seed = seed::derive_seed(master_seed, "five-by-two-stack", stack);
            let train_data = data.subset(train_idx)?;
            let test_data = data.subset(test_idx)?;

            let model = match method {
                CombinerMethod::EqualWeights => equal_weights(ensemble.classifier_count()),
                CombinerMethod::Trained { config, lambda } => {
                    let level1 = internal_cv_scores(&train_data, ensemble, stack_seed)?;
                    let mut config = config.clone();
                    config.seed = seed::derive_seed(stack_seed, "train", 0);
                    config.lambda = match lambda {
                        LambdaChoice::Fixed(value) => *value,
                        LambdaChoice::CrossValidated(grid) => {
                            lambda_search(&level1, &config, grid)?.0
                        }
                    };
                    train(&level1, &config)?.0
                }
            };

            let fitted = fit_ensemble(&train_data, ensemble, stack_seed)?;
            let mut miss = 0usize;
            for i in 0..test_data.len() {
                let profile = fitted.score_profile(test_data.row(i))?;
                if model.predict(&profile)? != test_data.label(i) {
                    miss += 1;
                }
            }
            errors.push(100.0 * miss as f64 / test_data.len() as f64);
            selected.push(selected_count(&model, SELECTED_REL_TOL));
        }
    }
    StackResults::new(errors, selected)
}

/// Outcome of the one-tailed Wilcoxon signed-rank test for "a < b".
#[derive(Debug, Clone, PartialEq)]
pub enum WilcoxonOutcome {
    Conclusive { statistic: f64, p_value: f64, significant: bool },
    /// Fewer than five nonzero differences: no decision.
    Inconclusive { nonzero_count: usize },
}

/// Exact enumeration is used up to this many nonzero differences; beyond it
/// the normal approximation with tie correction takes over.
const WILCOXON_EXACT_LIMIT: usize = 20;

/// One-tailed Wilcoxon signed-rank test of the alternative "a < b" (paired).
///
/// Zero differences are dropped; ties in |difference| receive average ranks.
/// The reported statistic is `min(W+, W-)`; the p-value is the lower tail of
/// W+ (exact by sign enumeration for n <= 20, normal approximation with tie
/// correction above). The decision is `p <= alpha`.
pub fn wilcoxon_one_tailed(a: &[f64], b: &[f64], alpha: f64) -> Result<WilcoxonOutcome> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} must be in (0, 1)")));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite("paired differences"));
    }
    let n = diffs.len();
    if n < 5 {
        return Ok(WilcoxonOutcome::Inconclusive { nonzero_count: n });
    }

    let ranks = average_ranks(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let total = n as f64 * (n as f64 + 1.0) / 2.0;
    let w_minus = total - w_plus;
    let statistic = w_plus.min(w_minus);

    let p_value = if n <= WILCOXON_EXACT_LIMIT {
        exact_lower_tail(&ranks, w_plus)
    } else {
        normal_lower_tail(&ranks, w_plus)
    };
    Ok(WilcoxonOutcome::Conclusive { statistic, p_value, significant: p_value <= alpha })
}

/// Ranks of the values (1-based), with tied values sharing their average rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
    let mut ranks = vec![0.0; values.len()];
    let mut pos = 0;
    while pos < order.len() {
        let mut end = pos + 1;
        while end < order.len() && values[order[end]] == values[order[pos]] {
            end += 1;
        }
        // Positions pos..end hold ranks pos+1 ..= end; share their mean.
        let avg = (pos + 1 + end) as f64 / 2.0;
        for &i in &order[pos..end] {
            ranks[i] = avg;
        }
        pos = end;
    }
    ranks
}

/// P(W+ <= observed) by enumerating every sign assignment.
fn exact_lower_tail(ranks: &[f64], observed: f64) -> f64 {
    let n = ranks.len();
    let mut hits = 0u64;
    for mask in 0u64..(1u64 << n) {
        let mut sum = 0.0;
        for (j, &r) in ranks.iter().enumerate() {
            if mask & (1 << j) != 0 {
                sum += r;
            }
        }
        if sum <= observed + 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}

/// Normal approximation of P(W+ <= observed) with tie correction and
/// continuity correction.
fn normal_lower_tail(ranks: &[f64], observed: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    // Tie sizes from equal ranks.
    let mut sorted = ranks.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut tie_term = 0.0;
    let mut pos = 0;
    while pos < sorted.len() {
        let mut end = pos + 1;
        while end < sorted.len() && sorted[end] == sorted[pos] {
            end += 1;
        }
        let t = (end - pos) as f64;
        tie_term += t * t * t - t;
        pos = end;
    }
    let variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    let z = (observed - mean + 0.5) / variance.sqrt();
    standard_normal_cdf(z)
}

fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}
