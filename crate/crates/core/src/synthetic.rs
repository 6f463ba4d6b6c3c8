//! Seeded synthetic datasets for fixtures and benchmarks.

use crate::profile::FeatureDataset;
use crate::seed;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn normal(rng: &mut impl Rng) -> f64 {
    <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
}

/// Gaussian class clusters: class centers drawn from N(0, spread^2) per
/// coordinate, instances from N(center, noise^2). Labels cycle through the
/// classes, so counts are balanced.
pub fn gaussian_blobs(
    instance_count: usize,
    feature_count: usize,
    class_count: usize,
    center_spread: f64,
    noise: f64,
    seed: u64,
) -> FeatureDataset {
    let mut center_rng = seed::rng_for(seed, "blob-centers", 0);
    let centers: Vec<f64> =
        (0..class_count * feature_count).map(|_| center_spread * normal(&mut center_rng)).collect();
    let mut point_rng = seed::rng_for(seed, "blob-points", 0);
    let mut features = Vec::with_capacity(instance_count * feature_count);
    let mut labels = Vec::with_capacity(instance_count);
    for i in 0..instance_count {
        let class = i % class_count;
        for f in 0..feature_count {
            features.push(centers[class * feature_count + f] + noise * normal(&mut point_rng));
        }
        labels.push(class);
    }
    FeatureDataset::new(features, feature_count, labels, class_count)
        .expect("generated dataset is valid")
}

/// Gaussian class clusters where only the first `informative_count` features
/// carry class structure; the remaining features are pure noise. Learners
/// that weight all coordinates equally (nearest mean, KNN) degrade with the
/// nuisance features, so ensemble members differ in quality.
pub fn partially_informative_blobs(
    instance_count: usize,
    informative_count: usize,
    nuisance_count: usize,
    class_count: usize,
    center_spread: f64,
    noise: f64,
    seed: u64,
) -> FeatureDataset {
    let feature_count = informative_count + nuisance_count;
    let mut center_rng = seed::rng_for(seed, "blob-centers", 0);
    let centers: Vec<f64> = (0..class_count * informative_count)
        .map(|_| center_spread * normal(&mut center_rng))
        .collect();
    let mut point_rng = seed::rng_for(seed, "blob-points", 0);
    let mut features = Vec::with_capacity(instance_count * feature_count);
    let mut labels = Vec::with_capacity(instance_count);
    for i in 0..instance_count {
        let class = i % class_count;
        for f in 0..informative_count {
            features.push(centers[class * informative_count + f] + noise * normal(&mut point_rng));
        }
        for _ in 0..nuisance_count {
            features.push(noise * normal(&mut point_rng));
        }
        labels.push(class);
    }
    FeatureDataset::new(features, feature_count, labels, class_count)
        .expect("generated dataset is valid")
}

/// Concentric 2-D rings, one radius per class, with radial noise. Not
/// linearly separable, so distance-based and kernel-style learners separate
/// the classes while linear ones cannot.
pub fn concentric_rings(
    instance_count: usize,
    class_count: usize,
    noise: f64,
    seed: u64,
) -> FeatureDataset {
    let mut rng = seed::rng_for(seed, "ring-points", 0);
    let mut features = Vec::with_capacity(instance_count * 2);
    let mut labels = Vec::with_capacity(instance_count);
    for i in 0..instance_count {
        let class = i % class_count;
        let radius = 1.0 + 2.0 * class as f64 + noise * normal(&mut rng);
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        features.push(radius * angle.cos());
        features.push(radius * angle.sin());
        labels.push(class);
    }
    FeatureDataset::new(features, 2, labels, class_count).expect("generated dataset is valid")
}
