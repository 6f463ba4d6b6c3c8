//! Linear classifier combination and selection by stacked generalization.
//!
//! An ensemble of base classifiers emits per-class posterior scores for each
//! instance; a level-1 combiner maps those scores to final class scores. This
//! crate trains the three linear combiner families — weighted sum (WS, one
//! weight per classifier), class-dependent weighted sum (CWS, one weight per
//! classifier per class) and full linear stacked generalization (LSG) — by
//! regularized empirical risk minimization with the multiclass hinge or
//! least-squares loss. Sparse (l1) and group-sparse (l1-l2) regularizers
//! drive entire classifier weight groups to zero, so training doubles as
//! automatic classifier selection.
//!
//! The crate also ships the supporting experimental machinery: level-1 data
//! generation by internal cross-validation ([`stacking`]), small built-in
//! base learners ([`learners`]), a deterministic proximal subgradient solver
//! with inner cross-validated lambda selection ([`solver`]), and a 5x2
//! cross-validation harness with a one-tailed Wilcoxon signed-rank test
//! ([`eval`]).

pub mod combiner;
pub mod error;
pub mod eval;
pub mod learners;
pub mod loss;
pub mod profile;
pub mod reg;
pub mod seed;
pub mod solver;
pub mod split;
pub mod stacking;
pub mod synthetic;

pub use combiner::{CombinerKind, CombinerModel};
pub use error::{Error, Result};
pub use eval::{selected_count, wilcoxon_one_tailed, StackResults, WilcoxonOutcome};
pub use learners::{BaseLearnerSpec, BaseModel, LearnerKind};
pub use loss::LossKind;
pub use profile::{FeatureDataset, LevelOneDataset, ScoreProfile};
pub use reg::RegKind;
pub use solver::{LambdaGrid, TrainConfig};
pub use stacking::{EnsembleMember, EnsembleSpec};
