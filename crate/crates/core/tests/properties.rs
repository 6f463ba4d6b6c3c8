//! Convexity, subgradient and proximal-operator properties checked against
//! independent numerical oracles.

mod common;

use common::random_level_one;
use linstack::loss::{self, LossKind};
use linstack::profile::LevelOneDataset;
use linstack::reg::{self, RegKind};
use linstack::solver::{objective, TrainConfig};
use linstack::{CombinerKind, CombinerModel};
use rand::Rng;

fn random_model(kind: CombinerKind, m: usize, n: usize, rng: &mut impl Rng) -> CombinerModel {
    let mut model = CombinerModel::zeros(kind, m, n);
    for w in model.weights_mut() {
        *w = rng.random_range(-1.5..1.5);
    }
    if let Some(bias) = model.bias_mut() {
        for b in bias {
            *b = rng.random_range(-1.0..1.0);
        }
    }
    model
}

fn inner_product(a: &CombinerModel, b: &CombinerModel) -> f64 {
    let mut dot: f64 = a.weights().iter().zip(b.weights()).map(|(x, y)| x * y).sum();
    if let (Some(ab), Some(bb)) = (a.bias(), b.bias()) {
        dot += ab.iter().zip(bb).map(|(x, y)| x * y).sum::<f64>();
    }
    dot
}

/// Convexity lower bound: risk(model + eps*d) >= risk(model) + eps*<g, d> - 1e-8.
#[test]
fn subgradient_satisfies_convexity_lower_bound() {
    let mut rng = linstack::seed::rng_for(21, "subgrad-validity", 0);
    let kinds = [CombinerKind::Ws, CombinerKind::Cws, CombinerKind::Lsg];
    let losses = [LossKind::Hinge, LossKind::LeastSquares];
    let data = random_level_one(20, 3, 3, 77);
    for trial in 0..200 {
        let kind = kinds[trial % 3];
        let loss_kind = losses[trial % 2];
        let model = random_model(kind, 3, 3, &mut rng);
        let direction = random_model(kind, 3, 3, &mut rng);
        let grad = loss::risk_subgradient(&model, &data, loss_kind).unwrap();
        let base = loss::empirical_risk(&model, &data, loss_kind).unwrap();
        let slope = inner_product(&grad, &direction);
        for eps in [1e-4, 1e-3] {
            let mut moved = model.clone();
            moved.add_scaled(eps, &direction).unwrap();
            let value = loss::empirical_risk(&moved, &data, loss_kind).unwrap();
            assert!(
                value >= base + eps * slope - 1e-8,
                "trial {trial} {kind:?}/{loss_kind:?} eps {eps}: {value} < {base} + {}",
                eps * slope
            );
        }
    }
}

#[test]
fn ls_gradient_matches_finite_differences_everywhere() {
    let mut rng = linstack::seed::rng_for(22, "ls-fd-full", 0);
    let data = random_level_one(15, 2, 3, 78);
    for kind in [CombinerKind::Ws, CombinerKind::Cws, CombinerKind::Lsg] {
        let model = random_model(kind, 2, 3, &mut rng);
        let grad = loss::risk_subgradient(&model, &data, LossKind::LeastSquares).unwrap();
        let h = 1e-6;
        let dim = model.weights().len() + model.bias().map_or(0, <[f64]>::len);
        for j in 0..dim {
            let mut plus = model.clone();
            let mut minus = model.clone();
            let nudge = |m: &mut CombinerModel, delta: f64| {
                let wlen = m.weights().len();
                if j < wlen {
                    m.weights_mut()[j] += delta;
                } else {
                    m.bias_mut().unwrap()[j - wlen] += delta;
                }
            };
            nudge(&mut plus, h);
            nudge(&mut minus, -h);
            let fd = (loss::empirical_risk(&plus, &data, LossKind::LeastSquares).unwrap()
                - loss::empirical_risk(&minus, &data, LossKind::LeastSquares).unwrap())
                / (2.0 * h);
            let wlen = grad.weights().len();
            let g = if j < wlen { grad.weights()[j] } else { grad.bias().unwrap()[j - wlen] };
            assert!(
                (fd - g).abs() <= 1e-5 * g.abs().max(1.0),
                "{kind:?} coordinate {j}: fd {fd} vs {g}"
            );
        }
    }
}

/// Zoom-grid minimizer of a scalar function on [-radius, radius].
fn zoom_grid_1d(f: impl Fn(f64) -> f64, radius: f64) -> f64 {
    let mut center = 0.0;
    let mut half = radius;
    for _ in 0..10 {
        let mut best = (f64::INFINITY, center);
        for i in 0..=80 {
            let z = center - half + 2.0 * half * i as f64 / 80.0;
            let v = f(z);
            if v < best.0 {
                best = (v, z);
            }
        }
        center = best.1;
        half = half * 4.0 / 80.0;
    }
    center
}

/// Zoom-grid minimizer of a 2-D function on [-radius, radius]^2.
fn zoom_grid_2d(f: impl Fn(f64, f64) -> f64, radius: f64) -> (f64, f64) {
    let mut center = (0.0, 0.0);
    let mut half = radius;
    for _ in 0..10 {
        let mut best = (f64::INFINITY, center);
        for i in 0..=40 {
            for j in 0..=40 {
                let z0 = center.0 - half + 2.0 * half * i as f64 / 40.0;
                let z1 = center.1 - half + 2.0 * half * j as f64 / 40.0;
                let v = f(z0, z1);
                if v < best.0 {
                    best = (v, (z0, z1));
                }
            }
        }
        center = best.1;
        half = half * 4.0 / 40.0;
    }
    center
}

#[test]
fn l1_prox_matches_grid_search_oracle() {
    let mut rng = linstack::seed::rng_for(23, "prox-oracle-l1", 0);
    for _ in 0..50 {
        let x = rng.random_range(-4.0..4.0);
        let t = rng.random_range(0.0..3.0);
        let model = CombinerModel::ws(vec![x]).unwrap();
        let out = reg::prox(&model, RegKind::L1, t).unwrap();
        let expected = zoom_grid_1d(|z| 0.5 * (z - x) * (z - x) + t * z.abs(), x.abs() + t + 1.0);
        assert!(
            (out.weights()[0] - expected).abs() <= 1e-6,
            "x={x} t={t}: prox {} vs oracle {expected}",
            out.weights()[0]
        );
    }
}

#[test]
fn group_prox_matches_grid_search_oracle() {
    let mut rng = linstack::seed::rng_for(24, "prox-oracle-group", 0);
    for _ in 0..20 {
        let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let t = rng.random_range(0.0..3.0);
        // One CWS row of two entries forms a single group.
        let model = CombinerModel::cws(x.to_vec(), 1, 2).unwrap();
        let out = reg::prox(&model, RegKind::GroupL1L2, t).unwrap();
        let radius = (x[0] * x[0] + x[1] * x[1]).sqrt() + t + 1.0;
        let (e0, e1) = zoom_grid_2d(
            |z0, z1| {
                0.5 * ((z0 - x[0]) * (z0 - x[0]) + (z1 - x[1]) * (z1 - x[1]))
                    + t * (z0 * z0 + z1 * z1).sqrt()
            },
            radius,
        );
        assert!(
            (out.weights()[0] - e0).abs() <= 1e-6 && (out.weights()[1] - e1).abs() <= 1e-6,
            "x={x:?} t={t}: prox {:?} vs oracle ({e0}, {e1})",
            out.weights()
        );
    }
}

#[test]
fn full_objective_is_convex_for_every_loss_reg_pair() {
    let mut rng = linstack::seed::rng_for(25, "objective-convexity", 0);
    let data = random_level_one(12, 2, 3, 79);
    for loss_kind in [LossKind::Hinge, LossKind::LeastSquares] {
        for reg_kind in [RegKind::L2, RegKind::L1, RegKind::GroupL1L2] {
            for kind in [CombinerKind::Ws, CombinerKind::Cws, CombinerKind::Lsg] {
                if !reg_kind.valid_for(kind) {
                    continue;
                }
                let config = TrainConfig::new(kind, loss_kind, reg_kind).with_lambda(0.3);
                for _ in 0..40 {
                    let a = random_model(kind, 2, 3, &mut rng);
                    let b = random_model(kind, 2, 3, &mut rng);
                    let alpha: f64 = rng.random_range(0.0..1.0);
                    let mut mix = CombinerModel::zeros(kind, 2, 3);
                    mix.add_scaled(alpha, &a).unwrap();
                    mix.add_scaled(1.0 - alpha, &b).unwrap();
                    let va = objective(&a, &data, &config).unwrap();
                    let vb = objective(&b, &data, &config).unwrap();
                    let vm = objective(&mix, &data, &config).unwrap();
                    assert!(
                        vm <= alpha * va + (1.0 - alpha) * vb + 1e-9,
                        "{loss_kind:?}/{reg_kind:?}/{kind:?}: {vm} > {alpha} * {va} + {} * {vb}",
                        1.0 - alpha
                    );
                }
            }
        }
    }
}

/// Hinge risk at the zero model is exactly 1 regardless of data.
#[test]
fn zero_model_hinge_risk_anchor() {
    for (m, n, i, seed) in [(3, 3, 30, 101), (5, 2, 7, 102), (2, 6, 50, 103)] {
        let data = random_level_one(i, m, n, seed);
        let model = CombinerModel::zeros(CombinerKind::Cws, m, n);
        assert_eq!(loss::empirical_risk(&model, &data, LossKind::Hinge).unwrap(), 1.0);
    }
    // Also with labels missing a class entirely.
    let profiles = vec![
        linstack::ScoreProfile::new(1, 3, vec![0.2, 0.3, 0.5]).unwrap(),
        linstack::ScoreProfile::new(1, 3, vec![0.9, 0.05, 0.05]).unwrap(),
    ];
    let data = LevelOneDataset::new(profiles, vec![0, 0]).unwrap();
    let model = CombinerModel::zeros(CombinerKind::Lsg, 1, 3);
    assert_eq!(loss::empirical_risk(&model, &data, LossKind::Hinge).unwrap(), 1.0);
}
