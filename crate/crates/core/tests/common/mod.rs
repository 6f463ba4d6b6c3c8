//! Shared helpers for integration tests: an independent reference optimizer
//! for the combiner objectives, plus fixture generators.
//!
//! The reference path works on flat weight vectors with its own objective
//! and subgradient evaluation, so it shares no code with the solver it
//! checks.
#![allow(dead_code)]

use linstack::profile::{LevelOneDataset, ScoreProfile};
use linstack::{CombinerKind, LossKind, RegKind};
use rand::Rng;

/// A combiner training problem flattened to a plain parameter vector.
/// Layout: WS = M weights; CWS = M*N row-major; LSG = N*(M*N) row-major
/// weights followed by N bias entries.
pub struct FlatProblem {
    pub combiner: CombinerKind,
    pub loss: LossKind,
    pub reg: RegKind,
    pub lambda: f64,
    pub classifier_count: usize,
    pub class_count: usize,
    pub profiles: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl FlatProblem {
    pub fn from_dataset(
        dataset: &LevelOneDataset,
        combiner: CombinerKind,
        loss: LossKind,
        reg: RegKind,
        lambda: f64,
    ) -> Self {
        Self {
            combiner,
            loss,
            reg,
            lambda,
            classifier_count: dataset.classifier_count(),
            class_count: dataset.class_count(),
            profiles: (0..dataset.len()).map(|i| dataset.profile(i).scores().to_vec()).collect(),
            labels: dataset.labels().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        let (m, n) = (self.classifier_count, self.class_count);
        match self.combiner {
            CombinerKind::Ws => m,
            CombinerKind::Cws => m * n,
            CombinerKind::Lsg => n * m * n + n,
        }
    }

    fn weight_dim(&self) -> usize {
        let (m, n) = (self.classifier_count, self.class_count);
        match self.combiner {
            CombinerKind::Ws => m,
            CombinerKind::Cws => m * n,
            CombinerKind::Lsg => n * m * n,
        }
    }

    fn combined(&self, x: &[f64], profile: &[f64]) -> Vec<f64> {
        let (m, n) = (self.classifier_count, self.class_count);
        let mut out = vec![0.0; n];
        match self.combiner {
            CombinerKind::Ws => {
                for mi in 0..m {
                    for ni in 0..n {
                        out[ni] += x[mi] * profile[mi * n + ni];
                    }
                }
            }
            CombinerKind::Cws => {
                for mi in 0..m {
                    for ni in 0..n {
                        out[ni] += x[mi * n + ni] * profile[mi * n + ni];
                    }
                }
            }
            CombinerKind::Lsg => {
                let width = m * n;
                for ni in 0..n {
                    let mut acc = x[self.weight_dim() + ni];
                    for j in 0..width {
                        acc += x[ni * width + j] * profile[j];
                    }
                    out[ni] = acc;
                }
            }
        }
        out
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let mut risk = 0.0;
        for (profile, &label) in self.profiles.iter().zip(&self.labels) {
            let r = self.combined(x, profile);
            risk += match self.loss {
                LossKind::Hinge => {
                    let rival = Self::rival(&r, label);
                    (1.0 - r[label] + r[rival]).max(0.0)
                }
                LossKind::LeastSquares => r
                    .iter()
                    .enumerate()
                    .map(|(ni, &v)| {
                        let t = if ni == label { 1.0 } else { 0.0 };
                        (v - t) * (v - t)
                    })
                    .sum(),
            };
        }
        risk /= self.profiles.len() as f64;
        risk + self.lambda * self.penalty(x)
    }

    fn rival(scores: &[f64], label: usize) -> usize {
        let mut best = usize::MAX;
        for ni in 0..scores.len() {
            if ni != label && (best == usize::MAX || scores[ni] > scores[best]) {
                best = ni;
            }
        }
        best
    }

    fn group_slices(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let (m, n) = (self.classifier_count, self.class_count);
        match self.combiner {
            CombinerKind::Ws => (0..m).map(|mi| vec![x[mi]]).collect(),
            CombinerKind::Cws => (0..m).map(|mi| x[mi * n..(mi + 1) * n].to_vec()).collect(),
            CombinerKind::Lsg => {
                let width = m * n;
                (0..m)
                    .map(|mi| {
                        let mut block = Vec::with_capacity(n * n);
                        for ni in 0..n {
                            block.extend_from_slice(&x[ni * width + mi * n..ni * width + (mi + 1) * n]);
                        }
                        block
                    })
                    .collect()
            }
        }
    }

    fn penalty(&self, x: &[f64]) -> f64 {
        let w = &x[..self.weight_dim()];
        match self.reg {
            RegKind::L2 => w.iter().map(|v| v * v).sum(),
            RegKind::L1 => w.iter().map(|v| v.abs()).sum(),
            RegKind::GroupL1L2 => self
                .group_slices(x)
                .iter()
                .map(|g| g.iter().map(|v| v * v).sum::<f64>().sqrt())
                .sum(),
        }
    }

    /// A subgradient of the full objective at x.
    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let (m, n) = (self.classifier_count, self.class_count);
        let mut g = vec![0.0; self.dim()];
        for (profile, &label) in self.profiles.iter().zip(&self.labels) {
            let r = self.combined(x, profile);
            let mut coeff = vec![0.0; n];
            match self.loss {
                LossKind::Hinge => {
                    let rival = Self::rival(&r, label);
                    if 1.0 - r[label] + r[rival] > 0.0 {
                        coeff[rival] = 1.0;
                        coeff[label] = -1.0;
                    }
                }
                LossKind::LeastSquares => {
                    for ni in 0..n {
                        let t = if ni == label { 1.0 } else { 0.0 };
                        coeff[ni] = 2.0 * (r[ni] - t);
                    }
                }
            }
            match self.combiner {
                CombinerKind::Ws => {
                    for mi in 0..m {
                        for ni in 0..n {
                            g[mi] += coeff[ni] * profile[mi * n + ni];
                        }
                    }
                }
                CombinerKind::Cws => {
                    for mi in 0..m {
                        for ni in 0..n {
                            g[mi * n + ni] += coeff[ni] * profile[mi * n + ni];
                        }
                    }
                }
                CombinerKind::Lsg => {
                    let width = m * n;
                    for ni in 0..n {
                        if coeff[ni] == 0.0 {
                            continue;
                        }
                        for j in 0..width {
                            g[ni * width + j] += coeff[ni] * profile[j];
                        }
                        g[self.weight_dim() + ni] += coeff[ni];
                    }
                }
            }
        }
        let scale = 1.0 / self.profiles.len() as f64;
        for v in &mut g {
            *v *= scale;
        }
        // Regularizer subgradient on the weight part.
        let wd = self.weight_dim();
        match self.reg {
            RegKind::L2 => {
                for j in 0..wd {
                    g[j] += self.lambda * 2.0 * x[j];
                }
            }
            RegKind::L1 => {
                for j in 0..wd {
                    g[j] += self.lambda * x[j].signum() * if x[j] == 0.0 { 0.0 } else { 1.0 };
                }
            }
            RegKind::GroupL1L2 => {
                let norms: Vec<f64> = self
                    .group_slices(x)
                    .iter()
                    .map(|gr| gr.iter().map(|v| v * v).sum::<f64>().sqrt())
                    .collect();
                match self.combiner {
                    CombinerKind::Ws => unreachable!("group penalty is rejected for ws"),
                    CombinerKind::Cws => {
                        for mi in 0..m {
                            if norms[mi] > 0.0 {
                                for ni in 0..n {
                                    g[mi * n + ni] += self.lambda * x[mi * n + ni] / norms[mi];
                                }
                            }
                        }
                    }
                    CombinerKind::Lsg => {
                        let width = m * n;
                        for mi in 0..m {
                            if norms[mi] > 0.0 {
                                for ni in 0..n {
                                    for c in mi * n..(mi + 1) * n {
                                        g[ni * width + c] += self.lambda * x[ni * width + c] / norms[mi];
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        g
    }
}

/// Long-run averaged-subgradient reference: diminishing normalized steps
/// from the origin, tracking the best objective over the raw iterates and a
/// suffix-averaged stream (the average restarts at each power of two, so
/// late averages are not dragged by the early transient).
pub fn reference_optimum(problem: &FlatProblem, iterations: usize, step0: f64) -> f64 {
    let dim = problem.dim();
    let mut x = vec![0.0; dim];
    let mut avg = vec![0.0; dim];
    let mut avg_len = 0u64;
    let mut best = problem.objective(&x);
    for t in 1..=iterations {
        let g = problem.subgradient(&x);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let step = step0 / ((t as f64).sqrt() * norm);
        for (xv, gv) in x.iter_mut().zip(&g) {
            *xv -= step * gv;
        }
        if (t as u64).is_power_of_two() {
            avg_len = 0;
        }
        avg_len += 1;
        let weight = 1.0 / avg_len as f64;
        for (av, xv) in avg.iter_mut().zip(&x) {
            *av += weight * (xv - *av);
        }
        let value = problem.objective(&x);
        if value < best {
            best = value;
        }
        if t % 50 == 0 || t == iterations {
            let value = problem.objective(&avg);
            if value < best {
                best = value;
            }
        }
    }
    best
}

/// Seeded random level-1 instances: blocks are normalized positive scores,
/// with one informative classifier nudged toward the label so the problem
/// has structure.
pub fn random_level_one(
    instance_count: usize,
    classifier_count: usize,
    class_count: usize,
    seed: u64,
) -> LevelOneDataset {
    let mut rng = linstack::seed::rng_for(seed, "random-level-one", 0);
    let mut profiles = Vec::with_capacity(instance_count);
    let mut labels = Vec::with_capacity(instance_count);
    for _ in 0..instance_count {
        let label = rng.random_range(0..class_count);
        let mut scores = Vec::with_capacity(classifier_count * class_count);
        for m in 0..classifier_count {
            let mut block: Vec<f64> =
                (0..class_count).map(|_| rng.random_range(0.05..1.0)).collect();
            // First classifier is informative on most instances.
            if m == 0 && rng.random_range(0.0..1.0) < 0.8 {
                block[label] += 1.0;
            }
            let sum: f64 = block.iter().sum();
            scores.extend(block.iter().map(|v| v / sum));
        }
        profiles.push(ScoreProfile::new(classifier_count, class_count, scores).unwrap());
        labels.push(label);
    }
    LevelOneDataset::new(profiles, labels).unwrap()
}
