//! Error type shared across the crate.

use crate::combiner::CombinerKind;
use crate::reg::RegKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Model and score profile (or dataset) disagree on (classifier, class) counts.
    #[error(
        "shape mismatch: {context}: expected {expected_classifiers} classifiers x \
         {expected_classes} classes, got {actual_classifiers} x {actual_classes}"
    )]
    ShapeMismatch {
        context: &'static str,
        expected_classifiers: usize,
        expected_classes: usize,
        actual_classifiers: usize,
        actual_classes: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{kind:?} regularization is not defined for {combiner:?} models")]
    InvalidRegCombination { kind: RegKind, combiner: CombinerKind },

    #[error("proximal step size must be nonnegative, got {0}")]
    NegativeProxStep(f64),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("class {class} has {count} instance(s); stratified {fold_count}-fold split needs more")]
    Stratification { class: usize, count: usize, fold_count: usize },

    #[error("class {class} is absent from the training complement of fold {fold}")]
    FoldComplementMissingClass { fold: usize, class: usize },

    #[error("class {0} has no training instances")]
    EmptyClass(usize),

    #[error("base learner {index} failed: {source}")]
    LearnerTraining {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}
