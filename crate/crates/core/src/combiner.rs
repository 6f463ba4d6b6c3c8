//! The three linear combination rules and their shared model type.
//!
//! * WS — weighted sum: one weight per classifier, shared across classes.
//! * CWS — class-dependent weighted sum: one weight per classifier per
//!   class, applied to that class's own score.
//! * LSG — linear stacked generalization: a full linear map from all M*N
//!   scores to N class scores, plus a bias.
//!
//! WS and CWS embed into LSG as concatenations of (constant) diagonal
//! blocks, which is what [`embed_ws`] and [`embed_cws`] construct.

use crate::error::{Error, Result};
use crate::profile::ScoreProfile;

/// Combiner family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CombinerKind {
    Ws,
    Cws,
    Lsg,
}

impl std::fmt::Display for CombinerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CombinerKind::Ws => "ws",
            CombinerKind::Cws => "cws",
            CombinerKind::Lsg => "lsg",
        };
        f.write_str(s)
    }
}

/// A trained (or fixed) linear combiner.
///
/// Weight layouts are row-major:
/// * `Ws`: `weights[m]` is the weight of classifier m (length M).
/// * `Cws`: `weights[m * class_count + n]` is the weight of classifier m for
///   class n (M x N).
/// * `Lsg`: `weights[n * (M * N) + j]` is the weight of score j for class
///   output n (N x M*N), and `bias[n]` the class offset.
#[derive(Debug, Clone, PartialEq)]
pub enum CombinerModel {
    Ws { weights: Vec<f64> },
    Cws { weights: Vec<f64>, classifier_count: usize, class_count: usize },
    Lsg { weights: Vec<f64>, bias: Vec<f64>, classifier_count: usize, class_count: usize },
}

impl CombinerModel {
    /// WS model from per-classifier weights.
    pub fn ws(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("ws model needs at least one weight".into()));
        }
        check_finite(&weights)?;
        Ok(CombinerModel::Ws { weights })
    }

    /// CWS model from a row-major M x N weight matrix.
    pub fn cws(weights: Vec<f64>, classifier_count: usize, class_count: usize) -> Result<Self> {
        if weights.len() != classifier_count * class_count || classifier_count == 0 || class_count == 0 {
            return Err(Error::InvalidArgument(format!(
                "cws weights: got {} values for {} x {}",
                weights.len(),
                classifier_count,
                class_count
            )));
        }
        check_finite(&weights)?;
        Ok(CombinerModel::Cws { weights, classifier_count, class_count })
    }

    /// LSG model from a row-major N x (M*N) weight matrix and a bias of length N.
    pub fn lsg(
        weights: Vec<f64>,
        bias: Vec<f64>,
        classifier_count: usize,
        class_count: usize,
    ) -> Result<Self> {
        if weights.len() != class_count * classifier_count * class_count
            || bias.len() != class_count
            || classifier_count == 0
            || class_count == 0
        {
            return Err(Error::InvalidArgument(format!(
                "lsg weights: got {} values and {} bias entries for {} x {}",
                weights.len(),
                bias.len(),
                classifier_count,
                class_count
            )));
        }
        check_finite(&weights)?;
        check_finite(&bias)?;
        Ok(CombinerModel::Lsg { weights, bias, classifier_count, class_count })
    }

    /// All-zero model of the given kind and shape.
    pub fn zeros(kind: CombinerKind, classifier_count: usize, class_count: usize) -> Self {
        match kind {
            CombinerKind::Ws => CombinerModel::Ws { weights: vec![0.0; classifier_count] },
            CombinerKind::Cws => CombinerModel::Cws {
                weights: vec![0.0; classifier_count * class_count],
                classifier_count,
                class_count,
            },
            CombinerKind::Lsg => CombinerModel::Lsg {
                weights: vec![0.0; class_count * classifier_count * class_count],
                bias: vec![0.0; class_count],
                classifier_count,
                class_count,
            },
        }
    }

    pub fn kind(&self) -> CombinerKind {
        match self {
            CombinerModel::Ws { .. } => CombinerKind::Ws,
            CombinerModel::Cws { .. } => CombinerKind::Cws,
            CombinerModel::Lsg { .. } => CombinerKind::Lsg,
        }
    }

    pub fn classifier_count(&self) -> usize {
        match self {
            CombinerModel::Ws { weights } => weights.len(),
            CombinerModel::Cws { classifier_count, .. } => *classifier_count,
            CombinerModel::Lsg { classifier_count, .. } => *classifier_count,
        }
    }

    /// Declared class count; WS models apply to any class count.
    pub fn class_count(&self) -> Option<usize> {
        match self {
            CombinerModel::Ws { .. } => None,
            CombinerModel::Cws { class_count, .. } => Some(*class_count),
            CombinerModel::Lsg { class_count, .. } => Some(*class_count),
        }
    }

    /// Flat weight storage (bias excluded).
    pub fn weights(&self) -> &[f64] {
        match self {
            CombinerModel::Ws { weights } => weights,
            CombinerModel::Cws { weights, .. } => weights,
            CombinerModel::Lsg { weights, .. } => weights,
        }
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        match self {
            CombinerModel::Ws { weights } => weights,
            CombinerModel::Cws { weights, .. } => weights,
            CombinerModel::Lsg { weights, .. } => weights,
        }
    }

    pub fn bias(&self) -> Option<&[f64]> {
        match self {
            CombinerModel::Lsg { bias, .. } => Some(bias),
            _ => None,
        }
    }

    pub fn bias_mut(&mut self) -> Option<&mut [f64]> {
        match self {
            CombinerModel::Lsg { bias, .. } => Some(bias),
            _ => None,
        }
    }

    /// Contiguous index runs of each classifier's weight group in the flat
    /// weight storage. WS groups are singletons, CWS groups are matrix rows,
    /// LSG groups are the N x N column blocks (one run per class row).
    pub fn group_runs(&self) -> Vec<Vec<std::ops::Range<usize>>> {
        match self {
            CombinerModel::Ws { weights } => (0..weights.len()).map(|m| vec![m..m + 1]).collect(),
            CombinerModel::Cws { classifier_count, class_count, .. } => (0..*classifier_count)
                .map(|m| vec![m * class_count..(m + 1) * class_count])
                .collect(),
            CombinerModel::Lsg { classifier_count, class_count, .. } => {
                let width = classifier_count * class_count;
                (0..*classifier_count)
                    .map(|m| {
                        (0..*class_count)
                            .map(|n| n * width + m * class_count..n * width + (m + 1) * class_count)
                            .collect()
                    })
                    .collect()
            }
        }
    }

    /// Euclidean norm of each classifier's weight group: |u_m| for WS, row
    /// norms for CWS, block Frobenius norms for LSG.
    pub fn group_norms(&self) -> Vec<f64> {
        let weights = self.weights();
        self.group_runs()
            .iter()
            .map(|runs| {
                let sq: f64 = runs
                    .iter()
                    .flat_map(|r| weights[r.clone()].iter())
                    .map(|w| w * w)
                    .sum();
                sq.sqrt()
            })
            .collect()
    }

    /// In-place `self += coeff * other`; shapes must match exactly.
    pub fn add_scaled(&mut self, coeff: f64, other: &CombinerModel) -> Result<()> {
        if self.kind() != other.kind()
            || self.classifier_count() != other.classifier_count()
            || self.class_count() != other.class_count()
        {
            return Err(Error::ShapeMismatch {
                context: "model arithmetic",
                expected_classifiers: self.classifier_count(),
                expected_classes: self.class_count().unwrap_or(0),
                actual_classifiers: other.classifier_count(),
                actual_classes: other.class_count().unwrap_or(0),
            });
        }
        for (w, o) in self.weights_mut().iter_mut().zip(other.weights()) {
            *w += coeff * o;
        }
        if let (Some(b), Some(ob)) = (self.bias_mut(), other.bias()) {
            let ob = ob.to_vec();
            for (bv, ov) in b.iter_mut().zip(ob) {
                *bv += coeff * ov;
            }
        }
        Ok(())
    }

    /// In-place multiplication of all weights (and bias) by `coeff`.
    pub fn scale(&mut self, coeff: f64) {
        for w in self.weights_mut() {
            *w *= coeff;
        }
        if let Some(b) = self.bias_mut() {
            for v in b {
                *v *= coeff;
            }
        }
    }

    fn check_shape(&self, profile: &ScoreProfile, context: &'static str) -> Result<()> {
        let ok = self.classifier_count() == profile.classifier_count()
            && self.class_count().map_or(true, |n| n == profile.class_count());
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                context,
                expected_classifiers: self.classifier_count(),
                expected_classes: self.class_count().unwrap_or(profile.class_count()),
                actual_classifiers: profile.classifier_count(),
                actual_classes: profile.class_count(),
            })
        }
    }

    /// Combined per-class scores for one profile.
    pub fn combine(&self, profile: &ScoreProfile) -> Result<Vec<f64>> {
        self.check_shape(profile, "combine")?;
        let class_count = profile.class_count();
        let mut combined = vec![0.0; class_count];
        match self {
            CombinerModel::Ws { weights } => {
                for (m, &w) in weights.iter().enumerate() {
                    let block = profile.block(m);
                    for (n, c) in combined.iter_mut().enumerate() {
                        *c += w * block[n];
                    }
                }
            }
            CombinerModel::Cws { weights, .. } => {
                for m in 0..profile.classifier_count() {
                    let block = profile.block(m);
                    let row = &weights[m * class_count..(m + 1) * class_count];
                    for (n, c) in combined.iter_mut().enumerate() {
                        *c += row[n] * block[n];
                    }
                }
            }
            CombinerModel::Lsg { weights, bias, .. } => {
                let scores = profile.scores();
                let width = scores.len();
                for (n, c) in combined.iter_mut().enumerate() {
                    let row = &weights[n * width..(n + 1) * width];
                    *c = bias[n] + dot(row, scores);
                }
            }
        }
        if !combined.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("combined scores"));
        }
        Ok(combined)
    }

    /// Predicted class: argmax of the combined scores, ties broken by the
    /// lowest class index.
    pub fn predict(&self, profile: &ScoreProfile) -> Result<usize> {
        let combined = self.combine(profile)?;
        Ok(argmax(&combined))
    }
}

/// First maximal index; deterministic tie-break.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Expands WS weights into the equivalent LSG model: W is the concatenation
/// of constant diagonal blocks `u_m * I_N`, with zero bias.
pub fn embed_ws(weights: &[f64], class_count: usize) -> Result<CombinerModel> {
    check_finite(weights)?;
    if weights.is_empty() || class_count == 0 {
        return Err(Error::InvalidArgument("embed_ws needs weights and classes".into()));
    }
    let classifier_count = weights.len();
    let width = classifier_count * class_count;
    let mut w = vec![0.0; class_count * width];
    for (m, &u) in weights.iter().enumerate() {
        for n in 0..class_count {
            w[n * width + m * class_count + n] = u;
        }
    }
    CombinerModel::lsg(w, vec![0.0; class_count], classifier_count, class_count)
}

/// Expands a CWS weight matrix (row-major M x N) into the equivalent LSG
/// model: block m is `diag(v_m^1, ..., v_m^N)`, with zero bias.
pub fn embed_cws(
    weights: &[f64],
    classifier_count: usize,
    class_count: usize,
) -> Result<CombinerModel> {
    check_finite(weights)?;
    if weights.len() != classifier_count * class_count || classifier_count == 0 || class_count == 0 {
        return Err(Error::InvalidArgument(format!(
            "embed_cws: got {} values for {} x {}",
            weights.len(),
            classifier_count,
            class_count
        )));
    }
    let width = classifier_count * class_count;
    let mut w = vec![0.0; class_count * width];
    for m in 0..classifier_count {
        for n in 0..class_count {
            w[n * width + m * class_count + n] = weights[m * class_count + n];
        }
    }
    CombinerModel::lsg(w, vec![0.0; class_count], classifier_count, class_count)
}

/// The equal-weights (simple sum) baseline: WS with all weights 1.
pub fn equal_weights(classifier_count: usize) -> CombinerModel {
    CombinerModel::Ws { weights: vec![1.0; classifier_count] }
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("model weights"))
    }
}
