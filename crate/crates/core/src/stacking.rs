//! Level-1 data generation and ensemble fitting.
//!
//! Internal cross-validation splits the training data into k stratified
//! folds; each instance is scored by base classifiers trained on the other
//! k-1 folds (intersected with each classifier's own data subsample), so no
//! classifier ever scores an instance it was trained on. The deployment
//! ensemble is refit on the full training data for test-time scoring.

use crate::error::{Error, Result};
use crate::learners::{score_base, train_base, BaseLearnerSpec, BaseModel, LearnerKind};
use crate::profile::{FeatureDataset, LevelOneDataset, ScoreProfile};
use crate::seed;
use crate::split;

/// One ensemble slot: a base learner plus its data subsample.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMember {
    pub learner: BaseLearnerSpec,
    /// Fraction of the training data this member sees, in (0, 1].
    pub subsample_fraction: f64,
    /// Members sharing a subsample seed (and fraction) train on the same subset.
    pub subsample_seed: u64,
}

/// The ensemble recipe: ordered members and the internal CV fold count.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub members: Vec<EnsembleMember>,
    pub fold_count: usize,
}

impl EnsembleSpec {
    pub fn new(members: Vec<EnsembleMember>, fold_count: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("ensemble needs at least one member".into()));
        }
        if fold_count < 2 {
            return Err(Error::InvalidArgument(format!(
                "internal CV fold count {fold_count} must be >= 2"
            )));
        }
        for m in &members {
            if !(m.subsample_fraction > 0.0 && m.subsample_fraction <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "subsample fraction {} must be in (0, 1]",
                    m.subsample_fraction
                )));
            }
        }
        Ok(Self { members, fold_count })
    }

    pub fn classifier_count(&self) -> usize {
        self.members.len()
    }
}

/// Anything that can be trained on an index subset of a dataset and then
/// score single instances. Implemented by [`BaseLearnerSpec`]; tests use it
/// to audit the cross-validation plumbing with instrumented learners.
pub trait LevelZeroLearner {
    fn fit(&self, data: &FeatureDataset, indices: &[usize]) -> Result<Box<dyn LevelZeroScorer>>;
}

pub trait LevelZeroScorer {
    /// Per-class scores for one instance; length must equal the class count.
    fn score(&self, features: &[f64]) -> Result<Vec<f64>>;
}

impl LevelZeroScorer for BaseModel {
    fn score(&self, features: &[f64]) -> Result<Vec<f64>> {
        score_base(self, features)
    }
}

impl LevelZeroLearner for BaseLearnerSpec {
    fn fit(&self, data: &FeatureDataset, indices: &[usize]) -> Result<Box<dyn LevelZeroScorer>> {
        let subset = data.subset(indices)?;
        Ok(Box::new(train_base(self, &subset)?))
    }
}

/// Subsample selection for one generic member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsampleSpec {
    pub fraction: f64,
    pub seed: u64,
}

impl SubsampleSpec {
    pub fn full() -> Self {
        Self { fraction: 1.0, seed: 0 }
    }
}

/// The subset of training indices a member sees. Derivation depends only on
/// the call seed and the member's subsample seed, so members sharing a
/// subsample seed see the same subset, and internal CV agrees with the
/// deployment fit.
fn member_subsample(
    labels: &[usize],
    class_count: usize,
    sub: &SubsampleSpec,
    call_seed: u64,
) -> Result<Vec<usize>> {
    let mut rng = seed::rng_for(call_seed, "member-subsample", sub.seed);
    split::stratified_subsample(labels, class_count, sub.fraction, &mut rng)
}

/// Sorted intersection of two ascending index lists.
fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Level-1 data via internal k-fold cross-validation over arbitrary learners.
pub fn internal_cv_scores_with<L: LevelZeroLearner + ?Sized>(
    data: &FeatureDataset,
    members: &[(&L, SubsampleSpec)],
    fold_count: usize,
    call_seed: u64,
) -> Result<LevelOneDataset> {
    if members.is_empty() {
        return Err(Error::InvalidArgument("ensemble needs at least one member".into()));
    }
    let class_count = data.class_count();
    let mut rng = seed::rng_for(call_seed, "internal-cv-folds", 0);
    let assignment = split::stratified_folds(data.labels(), class_count, fold_count, &mut rng)?;

    let observed: Vec<usize> = {
        let hist = data.class_histogram();
        (0..class_count).filter(|&c| hist[c] > 0).collect()
    };
    for fold in 0..fold_count {
        let complement = split::complement_of(&assignment, fold);
        for &class in &observed {
            if !complement.iter().any(|&i| data.label(i) == class) {
                return Err(Error::FoldComplementMissingClass { fold, class });
            }
        }
    }

    let subsamples: Vec<Vec<usize>> = members
        .iter()
        .map(|(_, sub)| member_subsample(data.labels(), class_count, sub, call_seed))
        .collect::<Result<_>>()?;

    let width = members.len() * class_count;
    let mut scores = vec![0.0; data.len() * width];
    for fold in 0..fold_count {
        let complement = split::complement_of(&assignment, fold);
        let fold_members = split::members_of(&assignment, fold);
        for (m, (learner, _)) in members.iter().enumerate() {
            let train_idx = intersect_sorted(&complement, &subsamples[m]);
            let wrap = |e: Error| Error::LearnerTraining { index: m, source: Box::new(e) };
            let scorer = learner.fit(data, &train_idx).map_err(wrap)?;
            for &i in &fold_members {
                let block = scorer.score(data.row(i)).map_err(wrap)?;
                if block.len() != class_count {
                    return Err(wrap(Error::InvalidArgument(format!(
                        "scorer returned {} values for {class_count} classes",
                        block.len()
                    ))));
                }
                scores[i * width + m * class_count..i * width + (m + 1) * class_count]
                    .copy_from_slice(&block);
            }
        }
    }

    let profiles = (0..data.len())
        .map(|i| {
            ScoreProfile::new(
                members.len(),
                class_count,
                scores[i * width..(i + 1) * width].to_vec(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    LevelOneDataset::new(profiles, data.labels().to_vec())
}

/// Level-1 data for a concrete ensemble spec.
pub fn internal_cv_scores(
    data: &FeatureDataset,
    spec: &EnsembleSpec,
    call_seed: u64,
) -> Result<LevelOneDataset> {
    let members: Vec<(&BaseLearnerSpec, SubsampleSpec)> = spec
        .members
        .iter()
        .map(|m| {
            (&m.learner, SubsampleSpec { fraction: m.subsample_fraction, seed: m.subsample_seed })
        })
        .collect();
    internal_cv_scores_with(data, &members, spec.fold_count, call_seed)
}

/// The deployment ensemble: every member trained on its full subsample.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedEnsemble {
    models: Vec<BaseModel>,
    class_count: usize,
}

impl FittedEnsemble {
    pub fn models(&self) -> &[BaseModel] {
        &self.models
    }

    pub fn classifier_count(&self) -> usize {
        self.models.len()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Test-time score profile for one instance, blocks in member order.
    pub fn score_profile(&self, features: &[f64]) -> Result<ScoreProfile> {
        let mut scores = Vec::with_capacity(self.models.len() * self.class_count);
        for (m, model) in self.models.iter().enumerate() {
            let block = score_base(model, features)
                .map_err(|e| Error::LearnerTraining { index: m, source: Box::new(e) })?;
            scores.extend_from_slice(&block);
        }
        ScoreProfile::new(self.models.len(), self.class_count, scores)
    }
}

/// Trains all members on the full training data, each restricted to its own
/// subsample. Uses the same subsample derivation as [`internal_cv_scores`],
/// so the same `call_seed` yields the same member subsets.
pub fn fit_ensemble(
    data: &FeatureDataset,
    spec: &EnsembleSpec,
    call_seed: u64,
) -> Result<FittedEnsemble> {
    let mut models = Vec::with_capacity(spec.members.len());
    for (m, member) in spec.members.iter().enumerate() {
        let sub =
            SubsampleSpec { fraction: member.subsample_fraction, seed: member.subsample_seed };
        let indices = member_subsample(data.labels(), data.class_count(), &sub, call_seed)?;
        let subset = data
            .subset(&indices)
            .map_err(|e| Error::LearnerTraining { index: m, source: Box::new(e) })?;
        let model = train_base(&member.learner, &subset)
            .map_err(|e| Error::LearnerTraining { index: m, source: Box::new(e) })?;
        models.push(model);
    }
    Ok(FittedEnsemble { models, class_count: data.class_count() })
}

/// The desk-scale diverse kind set: one of each built-in family.
pub fn default_diverse_kinds() -> Vec<LearnerKind> {
    vec![
        LearnerKind::NearestMean,
        LearnerKind::GaussianNb,
        LearnerKind::Knn { neighbors: 5 },
        LearnerKind::MultinomialLogistic { l2: 1e-3 },
        LearnerKind::RandomFeatureMargin { width_scale: 1.0, feature_count: 60, lambda: 1e-3 },
    ]
}

/// Diverse ensemble: `bag_count` random data subsets, every kind trained on
/// each subset. Members are bag-major, so block `b * kinds.len() + k` is
/// kind k trained on bag b.
pub fn diverse_spec(
    bag_count: usize,
    fraction: f64,
    kinds: &[LearnerKind],
    seed: u64,
) -> Result<EnsembleSpec> {
    if bag_count == 0 {
        return Err(Error::InvalidArgument("bag count must be >= 1".into()));
    }
    if kinds.is_empty() {
        return Err(Error::InvalidArgument("diverse ensemble needs at least one kind".into()));
    }
    let mut members = Vec::with_capacity(bag_count * kinds.len());
    for bag in 0..bag_count {
        let subsample_seed = seed::derive_seed(seed, "bag", bag as u64);
        for (k, kind) in kinds.iter().enumerate() {
            let learner_seed = seed::derive_seed(seed, "learner", (bag * kinds.len() + k) as u64);
            members.push(EnsembleMember {
                learner: BaseLearnerSpec::new(kind.clone(), learner_seed),
                subsample_fraction: fraction,
                subsample_seed,
            });
        }
    }
    EnsembleSpec::new(members, 4)
}

/// Default diverse setup: 5 bags of 80% data x 5 kinds = 25 members.
pub fn default_diverse_spec(seed: u64) -> EnsembleSpec {
    diverse_spec(5, 0.8, &default_diverse_kinds(), seed).expect("static spec is valid")
}

/// Non-diverse ensemble: one family (random-feature margin classifiers) over
/// a width x regularization grid, all trained on the full data. Members with
/// the same width share a feature map, so diversity comes only from the
/// hyperparameters.
pub fn nondiverse_spec(
    width_scales: &[f64],
    lambdas: &[f64],
    feature_count: usize,
    seed: u64,
) -> Result<EnsembleSpec> {
    if width_scales.is_empty() || lambdas.is_empty() {
        return Err(Error::InvalidArgument("non-diverse grid must be nonempty".into()));
    }
    let mut members = Vec::with_capacity(width_scales.len() * lambdas.len());
    for (wi, &width_scale) in width_scales.iter().enumerate() {
        let map_seed = seed::derive_seed(seed, "width", wi as u64);
        for &lambda in lambdas {
            members.push(EnsembleMember {
                learner: BaseLearnerSpec::new(
                    LearnerKind::RandomFeatureMargin { width_scale, feature_count, lambda },
                    map_seed,
                ),
                subsample_fraction: 1.0,
                subsample_seed: 0,
            });
        }
    }
    EnsembleSpec::new(members, 4)
}

/// Default non-diverse setup: 6 widths x 5 regularization strengths = 30 members.
pub fn default_nondiverse_spec(seed: u64) -> EnsembleSpec {
    nondiverse_spec(&[0.25, 0.5, 1.0, 2.0, 4.0, 8.0], &[1e-4, 1e-3, 1e-2, 0.1, 1.0], 60, seed)
        .expect("static spec is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_dataset() -> FeatureDataset {
        // Two separable 1-D classes, 12 instances.
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..6 {
            features.push(i as f64 * 0.1);
            labels.push(0);
            features.push(10.0 + i as f64 * 0.1);
            labels.push(1);
        }
        FeatureDataset::new(features, 1, labels, 2).unwrap()
    }

    #[test]
    fn constant_learner_gives_uniform_profiles() {
        struct Constant;
        struct ConstantScorer(usize);
        impl LevelZeroLearner for Constant {
            fn fit(&self, data: &FeatureDataset, _: &[usize]) -> Result<Box<dyn LevelZeroScorer>> {
                Ok(Box::new(ConstantScorer(data.class_count())))
            }
        }
        impl LevelZeroScorer for ConstantScorer {
            fn score(&self, _: &[f64]) -> Result<Vec<f64>> {
                Ok(vec![1.0 / self.0 as f64; self.0])
            }
        }
        let data = small_dataset();
        let members: Vec<(&Constant, SubsampleSpec)> = vec![(&Constant, SubsampleSpec::full())];
        let level1 = internal_cv_scores_with(&data, &members, 3, 7).unwrap();
        for i in 0..level1.len() {
            assert_eq!(level1.profile(i).scores(), &[0.5, 0.5]);
        }
    }

    #[test]
    fn leave_one_out_knn_never_sees_itself() {
        // Points alternate classes along a line, so with leakage a 1-NN
        // would peak on its own label; without leakage the nearest other
        // point always has the opposite label.
        let features: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let labels: Vec<usize> = (0..10).map(|i| i % 2).collect();
        let data = FeatureDataset::new(features, 1, labels.clone(), 2).unwrap();
        let spec = EnsembleSpec::new(
            vec![EnsembleMember {
                learner: BaseLearnerSpec::new(LearnerKind::Knn { neighbors: 1 }, 0),
                subsample_fraction: 1.0,
                subsample_seed: 0,
            }],
            data.len(),
        )
        .unwrap();
        let level1 = internal_cv_scores(&data, &spec, 3).unwrap();
        for i in 0..level1.len() {
            let block = level1.profile(i).block(0);
            let own = labels[i];
            assert!(
                block[1 - own] > block[own],
                "instance {i} was scored by a model trained on itself: {block:?}"
            );
        }
    }

    #[test]
    fn profile_blocks_follow_member_order() {
        // A learner that scores constantly with its tag; block m must carry tag m.
        struct Tagged(f64);
        struct TaggedScorer(f64);
        impl LevelZeroLearner for Tagged {
            fn fit(&self, _: &FeatureDataset, _: &[usize]) -> Result<Box<dyn LevelZeroScorer>> {
                Ok(Box::new(TaggedScorer(self.0)))
            }
        }
        impl LevelZeroScorer for TaggedScorer {
            fn score(&self, _: &[f64]) -> Result<Vec<f64>> {
                Ok(vec![self.0, 1.0 - self.0])
            }
        }
        let data = small_dataset();
        let tags = [Tagged(0.1), Tagged(0.2), Tagged(0.3)];
        let members: Vec<(&Tagged, SubsampleSpec)> =
            tags.iter().map(|t| (t, SubsampleSpec::full())).collect();
        let level1 = internal_cv_scores_with(&data, &members, 2, 1).unwrap();
        for i in 0..level1.len() {
            for (m, tag) in [0.1, 0.2, 0.3].iter().enumerate() {
                assert_eq!(level1.profile(i).block(m)[0], *tag);
            }
        }
    }

    #[test]
    fn fit_ensemble_is_deterministic() {
        let data = small_dataset();
        let spec = EnsembleSpec::new(
            vec![EnsembleMember {
                learner: BaseLearnerSpec::new(LearnerKind::NearestMean, 1),
                subsample_fraction: 1.0,
                subsample_seed: 0,
            }],
            2,
        )
        .unwrap();
        let a = fit_ensemble(&data, &spec, 42).unwrap();
        let b = fit_ensemble(&data, &spec, 42).unwrap();
        assert_eq!(a.models(), b.models());
    }

    #[test]
    fn duplicated_member_yields_identical_blocks() {
        let data = small_dataset();
        let member = EnsembleMember {
            learner: BaseLearnerSpec::new(LearnerKind::NearestMean, 1),
            subsample_fraction: 1.0,
            subsample_seed: 0,
        };
        let spec = EnsembleSpec::new(vec![member.clone(), member], 2).unwrap();
        let fitted = fit_ensemble(&data, &spec, 9).unwrap();
        let profile = fitted.score_profile(&[3.0]).unwrap();
        assert_eq!(profile.block(0), profile.block(1));
    }

    #[test]
    fn shared_subsample_seed_shares_the_subset() {
        let data = small_dataset();
        // Two KNN members with the same subsample seed and fraction: their
        // stored training data must coincide.
        let make = |sub_seed| EnsembleMember {
            learner: BaseLearnerSpec::new(LearnerKind::Knn { neighbors: 1 }, 0),
            subsample_fraction: 0.5,
            subsample_seed: sub_seed,
        };
        let spec = EnsembleSpec::new(vec![make(3), make(3), make(4)], 2).unwrap();
        let fitted = fit_ensemble(&data, &spec, 11).unwrap();
        assert_eq!(fitted.models()[0], fitted.models()[1]);
        assert_ne!(fitted.models()[0], fitted.models()[2]);
    }

    #[test]
    fn diverse_spec_counts_match() {
        let spec = diverse_spec(10, 0.8, &default_diverse_kinds(), 0).unwrap();
        assert_eq!(spec.classifier_count(), 50);
        let spec = default_diverse_spec(0);
        assert_eq!(spec.classifier_count(), 25);
        assert_eq!(spec.fold_count, 4);
        // Members of one bag share the subsample seed.
        assert_eq!(spec.members[0].subsample_seed, spec.members[4].subsample_seed);
        assert_ne!(spec.members[0].subsample_seed, spec.members[5].subsample_seed);
    }

    #[test]
    fn paper_scale_diverse_spec() {
        // 10 bags x 13 kinds = 130 members.
        let kinds: Vec<LearnerKind> =
            (0..13).map(|i| LearnerKind::Knn { neighbors: i + 1 }).collect();
        let spec = diverse_spec(10, 0.8, &kinds, 0).unwrap();
        assert_eq!(spec.classifier_count(), 130);
    }

    #[test]
    fn nondiverse_spec_is_grid_sized() {
        let spec = default_nondiverse_spec(0);
        assert_eq!(spec.classifier_count(), 30);
        assert!(spec.members.iter().all(|m| m.subsample_fraction == 1.0));
        let err = nondiverse_spec(&[], &[0.1], 10, 0);
        assert!(err.is_err());
    }

    #[test]
    fn complement_missing_class_is_reported() {
        // Class 1 has a single instance: the fold holding it has a
        // complement without class 1.
        let data = FeatureDataset::new(vec![0.0, 1.0, 2.0], 1, vec![0, 0, 1], 2).unwrap();
        let spec = EnsembleSpec::new(
            vec![EnsembleMember {
                learner: BaseLearnerSpec::new(LearnerKind::Knn { neighbors: 1 }, 0),
                subsample_fraction: 1.0,
                subsample_seed: 0,
            }],
            2,
        )
        .unwrap();
        assert!(matches!(
            internal_cv_scores(&data, &spec, 0),
            Err(Error::FoldComplementMissingClass { class: 1, .. })
        ));
    }
}
