//! Stratified splitting and subsampling.
//!
//! Fold assignment deals each class's shuffled instances onto the folds with
//! a shared running counter, so fold sizes stay balanced globally and every
//! class is spread across as many folds as it has instances.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;

/// Per-instance fold assignment for a stratified k-fold split.
pub fn stratified_folds<R: Rng>(
    labels: &[usize],
    class_count: usize,
    fold_count: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if fold_count < 2 || fold_count > labels.len() {
        return Err(Error::InvalidArgument(format!(
            "fold count {fold_count} must be in 2..={}",
            labels.len()
        )));
    }
    let by_class = class_index_lists(labels, class_count);
    let mut assignment = vec![0usize; labels.len()];
    let mut counter = 0usize;
    for mut indices in by_class {
        indices.shuffle(rng);
        for i in indices {
            assignment[i] = counter % fold_count;
            counter += 1;
        }
    }
    Ok(assignment)
}

/// Splits instances into a stratified pair of halves. Every observed class
/// must have at least two instances so that both halves contain it.
pub fn stratified_halves<R: Rng>(
    labels: &[usize],
    class_count: usize,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    for (class, count) in class_counts(labels, class_count).into_iter().enumerate() {
        if count == 1 {
            return Err(Error::Stratification { class, count, fold_count: 2 });
        }
    }
    let assignment = stratified_folds(labels, class_count, 2, rng)?;
    Ok((members_of(&assignment, 0), members_of(&assignment, 1)))
}

/// Indices assigned to `fold`, ascending.
pub fn members_of(assignment: &[usize], fold: usize) -> Vec<usize> {
    (0..assignment.len()).filter(|&i| assignment[i] == fold).collect()
}

/// Indices not assigned to `fold`, ascending.
pub fn complement_of(assignment: &[usize], fold: usize) -> Vec<usize> {
    (0..assignment.len()).filter(|&i| assignment[i] != fold).collect()
}

/// Stratified subsample without replacement: per observed class, a shuffled
/// `round(fraction * count)` slice (at least one instance). Returned
/// ascending so downstream training order is stable.
pub fn stratified_subsample<R: Rng>(
    labels: &[usize],
    class_count: usize,
    fraction: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "subsample fraction {fraction} must be in (0, 1]"
        )));
    }
    if fraction == 1.0 {
        return Ok((0..labels.len()).collect());
    }
    let mut picked = Vec::new();
    for mut indices in class_index_lists(labels, class_count) {
        let take = ((fraction * indices.len() as f64).round() as usize).clamp(1, indices.len());
        indices.shuffle(rng);
        picked.extend_from_slice(&indices[..take]);
    }
    picked.sort_unstable();
    Ok(picked)
}

fn class_counts(labels: &[usize], class_count: usize) -> Vec<usize> {
    let mut counts = vec![0usize; class_count];
    for &y in labels {
        counts[y] += 1;
    }
    counts
}

/// Instance indices per class, skipping absent classes.
fn class_index_lists(labels: &[usize], class_count: usize) -> Vec<Vec<usize>> {
    let mut lists = vec![Vec::new(); class_count];
    for (i, &y) in labels.iter().enumerate() {
        lists[y].push(i);
    }
    lists.retain(|l| !l.is_empty());
    lists
}
