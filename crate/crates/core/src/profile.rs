//! Score profiles, level-1 datasets and raw feature datasets.
//!
//! A score profile is the combiner's input for one instance: the
//! concatenation of M base-classifier blocks, each holding N per-class
//! posterior scores. Block m occupies indices `m*N .. (m+1)*N`. Class
//! indices are 0-based throughout the crate.

use crate::error::{Error, Result};

/// Concatenated base-classifier scores for a single instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreProfile {
    classifier_count: usize,
    class_count: usize,
    scores: Vec<f64>,
}

impl ScoreProfile {
    /// Builds a profile from M contiguous blocks of N class scores.
    pub fn new(classifier_count: usize, class_count: usize, scores: Vec<f64>) -> Result<Self> {
        if classifier_count == 0 {
            return Err(Error::InvalidArgument("classifier count must be >= 1".into()));
        }
        if class_count < 2 {
            return Err(Error::InvalidArgument(format!(
                "class count must be >= 2, got {class_count}"
            )));
        }
        if scores.len() != classifier_count * class_count {
            return Err(Error::ShapeMismatch {
                context: "score profile",
                expected_classifiers: classifier_count,
                expected_classes: class_count,
                actual_classifiers: scores.len() / class_count.max(1),
                actual_classes: class_count,
            });
        }
        if !scores.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("score profile"));
        }
        Ok(Self { classifier_count, class_count, scores })
    }

    pub fn classifier_count(&self) -> usize {
        self.classifier_count
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Full concatenated score vector of length M*N.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Block of class scores emitted by classifier `m`.
    pub fn block(&self, classifier: usize) -> &[f64] {
        let start = classifier * self.class_count;
        &self.scores[start..start + self.class_count]
    }

    /// Score of class `class` from classifier `classifier`.
    pub fn score(&self, classifier: usize, class: usize) -> f64 {
        self.scores[classifier * self.class_count + class]
    }

    /// Class slice: the scores of one class across all classifiers.
    pub fn class_slice(&self, class: usize) -> Vec<f64> {
        (0..self.classifier_count).map(|m| self.score(m, class)).collect()
    }
}

/// Score profiles with true labels; the combiner's training data.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelOneDataset {
    profiles: Vec<ScoreProfile>,
    labels: Vec<usize>,
    classifier_count: usize,
    class_count: usize,
}

impl LevelOneDataset {
    pub fn new(profiles: Vec<ScoreProfile>, labels: Vec<usize>) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if profiles.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} profiles but {} labels",
                profiles.len(),
                labels.len()
            )));
        }
        let classifier_count = profiles[0].classifier_count();
        let class_count = profiles[0].class_count();
        for p in &profiles {
            if p.classifier_count() != classifier_count || p.class_count() != class_count {
                return Err(Error::ShapeMismatch {
                    context: "level-1 dataset",
                    expected_classifiers: classifier_count,
                    expected_classes: class_count,
                    actual_classifiers: p.classifier_count(),
                    actual_classes: p.class_count(),
                });
            }
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= class_count) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range for {class_count} classes"
            )));
        }
        Ok(Self { profiles, labels, classifier_count, class_count })
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn classifier_count(&self) -> usize {
        self.classifier_count
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn profile(&self, index: usize) -> &ScoreProfile {
        &self.profiles[index]
    }

    pub fn label(&self, index: usize) -> usize {
        self.labels[index]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ScoreProfile, usize)> {
        self.profiles.iter().zip(self.labels.iter().copied())
    }

    /// Subset by instance indices (in the given order).
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let profiles = indices.iter().map(|&i| self.profiles[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(profiles, labels)
    }
}

/// Raw feature vectors with labels; the base learners' training data.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset {
    features: Vec<f64>,
    feature_count: usize,
    labels: Vec<usize>,
    class_count: usize,
}

impl FeatureDataset {
    /// `features` is row-major with `feature_count` columns.
    pub fn new(
        features: Vec<f64>,
        feature_count: usize,
        labels: Vec<usize>,
        class_count: usize,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if feature_count == 0 {
            return Err(Error::InvalidArgument("feature count must be >= 1".into()));
        }
        if features.len() != labels.len() * feature_count {
            return Err(Error::InvalidArgument(format!(
                "feature matrix has {} values, expected {} rows x {} columns",
                features.len(),
                labels.len(),
                feature_count
            )));
        }
        if class_count < 2 {
            return Err(Error::InvalidArgument(format!(
                "class count must be >= 2, got {class_count}"
            )));
        }
        if !features.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("feature matrix"));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= class_count) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range for {class_count} classes"
            )));
        }
        Ok(Self { features, feature_count, labels, class_count })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn row(&self, index: usize) -> &[f64] {
        let start = index * self.feature_count;
        &self.features[start..start + self.feature_count]
    }

    pub fn label(&self, index: usize) -> usize {
        self.labels[index]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Instance count per class index.
    pub fn class_histogram(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.class_count];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Subset by instance indices (in the given order). Keeps the declared class count.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut features = Vec::with_capacity(indices.len() * self.feature_count);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self::new(features, self.feature_count, labels, self.class_count)
    }
}
