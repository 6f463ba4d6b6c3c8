//! Small built-in base classifiers.
//!
//! Every learner scores an instance with a probability vector over classes
//! (nonnegative, summing to one), which becomes one block of a score
//! profile. Kinds: nearest mean, Gaussian naive Bayes, k-nearest neighbors,
//! a linear margin classifier trained by the combiner solver on raw
//! features, and the same on a random cosine feature map approximating an
//! RBF kernel.

use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::profile::FeatureDataset;
use crate::seed;
use crate::solver::{train_linear_on_features, LinearScorer};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum LearnerKind {
    NearestMean,
    GaussianNb,
    Knn { neighbors: usize },
    MultinomialLogistic { l2: f64 },
    RandomFeatureMargin { width_scale: f64, feature_count: usize, lambda: f64 },
}

impl LearnerKind {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerKind::NearestMean => "nearest_mean",
            LearnerKind::GaussianNb => "gaussian_nb",
            LearnerKind::Knn { .. } => "knn",
            LearnerKind::MultinomialLogistic { .. } => "logistic",
            LearnerKind::RandomFeatureMargin { .. } => "random_feature",
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            LearnerKind::NearestMean | LearnerKind::GaussianNb => true,
            LearnerKind::Knn { neighbors } => neighbors >= 1,
            LearnerKind::MultinomialLogistic { l2 } => l2 >= 0.0 && l2.is_finite(),
            LearnerKind::RandomFeatureMargin { width_scale, feature_count, lambda } => {
                width_scale > 0.0 && feature_count >= 1 && lambda >= 0.0 && lambda.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid learner hyperparameters: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseLearnerSpec {
    pub kind: LearnerKind,
    pub seed: u64,
}

impl BaseLearnerSpec {
    pub fn new(kind: LearnerKind, seed: u64) -> Self {
        Self { kind, seed }
    }
}

/// A trained base classifier.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseModel {
    NearestMean(NearestMeanModel),
    GaussianNb(GaussianNbModel),
    Knn(KnnModel),
    Linear(LinearBaseModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NearestMeanModel {
    means: Vec<f64>,
    feature_count: usize,
    class_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNbModel {
    means: Vec<f64>,
    variances: Vec<f64>,
    log_priors: Vec<f64>,
    feature_count: usize,
    class_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    features: Vec<f64>,
    labels: Vec<usize>,
    feature_count: usize,
    class_count: usize,
    neighbors: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearBaseModel {
    scorer: LinearScorer,
    feature_map: Option<RandomFeatureMap>,
    class_count: usize,
}

/// Random cosine features: `sqrt(2/D) * cos(w_j . x + b_j)` with directions
/// drawn from a normal scaled by the inverse bandwidth, approximating an RBF
/// kernel of that bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomFeatureMap {
    directions: Vec<f64>,
    offsets: Vec<f64>,
    scale: f64,
    input_dim: usize,
    output_dim: usize,
}

impl RandomFeatureMap {
    fn build(input_dim: usize, output_dim: usize, bandwidth: f64, seed: u64) -> Self {
        let mut rng = seed::rng_for(seed, "random-feature-map", 0);
        let inv_bw = 1.0 / bandwidth;
        let directions: Vec<f64> = (0..output_dim * input_dim)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng) * inv_bw)
            .collect();
        let offsets: Vec<f64> =
            (0..output_dim).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let scale = (2.0 / output_dim as f64).sqrt();
        Self { directions, offsets, scale, input_dim, output_dim }
    }

    fn transform(&self, x: &[f64]) -> Vec<f64> {
        (0..self.output_dim)
            .map(|j| {
                let row = &self.directions[j * self.input_dim..(j + 1) * self.input_dim];
                let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum();
                self.scale * (z + self.offsets[j]).cos()
            })
            .collect()
    }
}

/// Trains one base classifier on the full given dataset.
pub fn train_base(spec: &BaseLearnerSpec, data: &FeatureDataset) -> Result<BaseModel> {
    spec.kind.validate()?;
    match spec.kind {
        LearnerKind::NearestMean => {
            let (means, _) = class_means(data)?;
            Ok(BaseModel::NearestMean(NearestMeanModel {
                means,
                feature_count: data.feature_count(),
                class_count: data.class_count(),
            }))
        }
        LearnerKind::GaussianNb => {
            let (means, counts) = class_means(data)?;
            let d = data.feature_count();
            let n_classes = data.class_count();
            let mut variances = vec![0.0; n_classes * d];
            for i in 0..data.len() {
                let y = data.label(i);
                let row = data.row(i);
                for (f, &x) in row.iter().enumerate() {
                    let diff = x - means[y * d + f];
                    variances[y * d + f] += diff * diff;
                }
            }
            for (c, &count) in counts.iter().enumerate() {
                for f in 0..d {
                    variances[c * d + f] = (variances[c * d + f] / count as f64).max(VARIANCE_FLOOR);
                }
            }
            let total = data.len() as f64;
            let log_priors = counts.iter().map(|&c| (c as f64 / total).ln()).collect();
            Ok(BaseModel::GaussianNb(GaussianNbModel {
                means,
                variances,
                log_priors,
                feature_count: d,
                class_count: n_classes,
            }))
        }
        LearnerKind::Knn { neighbors } => {
            if neighbors > data.len() {
                return Err(Error::InvalidArgument(format!(
                    "knn needs at least {neighbors} training instances, got {}",
                    data.len()
                )));
            }
            let mut features = Vec::with_capacity(data.len() * data.feature_count());
            for i in 0..data.len() {
                features.extend_from_slice(data.row(i));
            }
            Ok(BaseModel::Knn(KnnModel {
                features,
                labels: data.labels().to_vec(),
                feature_count: data.feature_count(),
                class_count: data.class_count(),
                neighbors,
            }))
        }
        LearnerKind::MultinomialLogistic { l2 } => {
            let rows: Vec<Vec<f64>> = (0..data.len()).map(|i| data.row(i).to_vec()).collect();
            let scorer = train_linear_on_features(
                &rows,
                data.labels(),
                data.class_count(),
                LossKind::Hinge,
                l2,
                spec.seed,
            )?;
            Ok(BaseModel::Linear(LinearBaseModel {
                scorer,
                feature_map: None,
                class_count: data.class_count(),
            }))
        }
        LearnerKind::RandomFeatureMargin { width_scale, feature_count, lambda } => {
            let bandwidth = (width_scale * median_pairwise_distance(data)).max(1e-9);
            let map = RandomFeatureMap::build(data.feature_count(), feature_count, bandwidth, spec.seed);
            let rows: Vec<Vec<f64>> =
                (0..data.len()).map(|i| map.transform(data.row(i))).collect();
            let scorer = train_linear_on_features(
                &rows,
                data.labels(),
                data.class_count(),
                LossKind::Hinge,
                lambda,
                spec.seed,
            )?;
            Ok(BaseModel::Linear(LinearBaseModel {
                scorer,
                feature_map: Some(map),
                class_count: data.class_count(),
            }))
        }
    }
}

/// Per-class posterior scores for one instance: nonnegative, summing to one.
pub fn score_base(model: &BaseModel, x: &[f64]) -> Result<Vec<f64>> {
    match model {
        BaseModel::NearestMean(m) => {
            check_dim(x, m.feature_count)?;
            let negated: Vec<f64> = (0..m.class_count)
                .map(|c| {
                    let mean = &m.means[c * m.feature_count..(c + 1) * m.feature_count];
                    -euclidean(x, mean)
                })
                .collect();
            Ok(softmax(&negated))
        }
        BaseModel::GaussianNb(m) => {
            check_dim(x, m.feature_count)?;
            let log_post: Vec<f64> = (0..m.class_count)
                .map(|c| {
                    let mut ll = m.log_priors[c];
                    for (f, &v) in x.iter().enumerate() {
                        let mean = m.means[c * m.feature_count + f];
                        let var = m.variances[c * m.feature_count + f];
                        let diff = v - mean;
                        ll += -0.5 * (std::f64::consts::TAU * var).ln() - diff * diff / (2.0 * var);
                    }
                    ll
                })
                .collect();
            Ok(softmax(&log_post))
        }
        BaseModel::Knn(m) => {
            check_dim(x, m.feature_count)?;
            let mut order: Vec<usize> = (0..m.labels.len()).collect();
            let dist_sq: Vec<f64> = (0..m.labels.len())
                .map(|i| {
                    let row = &m.features[i * m.feature_count..(i + 1) * m.feature_count];
                    row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum()
                })
                .collect();
            // Ties broken by lowest training index: the index is the sort key's
            // second component and sort_by is applied to (distance, index).
            order.sort_by(|&a, &b| {
                dist_sq[a].partial_cmp(&dist_sq[b]).unwrap().then(a.cmp(&b))
            });
            let mut counts = vec![0usize; m.class_count];
            for &i in order.iter().take(m.neighbors) {
                counts[m.labels[i]] += 1;
            }
            let denom = (m.neighbors + m.class_count) as f64;
            Ok(counts.iter().map(|&c| (c as f64 + 1.0) / denom).collect())
        }
        BaseModel::Linear(m) => {
            let margins = match &m.feature_map {
                Some(map) => {
                    check_dim(x, map.input_dim)?;
                    m.scorer.margins(&map.transform(x))?
                }
                None => m.scorer.margins(x)?,
            };
            Ok(softmax(&margins))
        }
    }
}

pub fn model_class_count(model: &BaseModel) -> usize {
    match model {
        BaseModel::NearestMean(m) => m.class_count,
        BaseModel::GaussianNb(m) => m.class_count,
        BaseModel::Knn(m) => m.class_count,
        BaseModel::Linear(m) => m.class_count,
    }
}

fn check_dim(x: &[f64], expected: usize) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "feature vector has {} values, model expects {expected}",
            x.len()
        )))
    }
}

/// Class means; errors on any class with no instances.
fn class_means(data: &FeatureDataset) -> Result<(Vec<f64>, Vec<usize>)> {
    let d = data.feature_count();
    let n_classes = data.class_count();
    let mut means = vec![0.0; n_classes * d];
    let mut counts = vec![0usize; n_classes];
    for i in 0..data.len() {
        let y = data.label(i);
        counts[y] += 1;
        for (f, &x) in data.row(i).iter().enumerate() {
            means[y * d + f] += x;
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        if count == 0 {
            return Err(Error::EmptyClass(c));
        }
        for f in 0..d {
            means[c * d + f] /= count as f64;
        }
    }
    Ok((means, counts))
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn softmax(values: &[f64]) -> Vec<f64> {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = values.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

/// Median pairwise Euclidean distance over at most 200 evenly spaced
/// instances; the bandwidth reference for random feature maps.
fn median_pairwise_distance(data: &FeatureDataset) -> f64 {
    let cap = 200usize.min(data.len());
    let stride = data.len().div_ceil(cap);
    let picks: Vec<usize> = (0..data.len()).step_by(stride).collect();
    let mut dists = Vec::with_capacity(picks.len() * (picks.len() - 1) / 2);
    for (a, &i) in picks.iter().enumerate() {
        for &j in &picks[a + 1..] {
            dists.push(euclidean(data.row(i), data.row(j)));
        }
    }
    if dists.is_empty() {
        return 1.0;
    }
    dists.sort_by(|x, y| x.partial_cmp(y).unwrap());
    dists[dists.len() / 2]
}
