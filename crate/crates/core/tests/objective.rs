use drfs::data::{MultiPopulationData, PopulationDataset};
use drfs::mu_model::MuCache;
use drfs::objective::gradcheck::{
    check_gradient, random_alpha_points, run_gradcheck, GradcheckInstance, DEFAULT_TOLERANCE,
};
use drfs::objective::{
    evaluate, kernel_weights, objective_gradient, population_loss, population_loss_and_gradient,
    replicate_noise, total_objective, Aggregation, AlphaVector, ObjectiveConfig,
};
use ndarray::{array, Array1};
use proptest::prelude::*;

fn cfg(b: usize, k: usize) -> ObjectiveConfig {
    ObjectiveConfig {
        mc_samples: b,
        neighbors: k,
        seed: 7,
        ..Default::default()
    }
}

/// Straight transcription of the Monte Carlo loss using per-row kernel weights.
fn naive_loss(alpha: &[f64], pop: &PopulationDataset, mu: &Array1<f64>, c: &ObjectiveConfig, epoch: u64) -> f64 {
    let (n, m) = pop.x.dim();
    let k = c.neighbors.min(n);
    let mut total = 0.0;
    for l in 0..c.mc_samples {
        let eps = replicate_noise(c.seed, epoch, &pop.id, l as u64, n, m);
        for i in 0..n {
            let s: Vec<f64> = (0..m).map(|d| pop.x[[i, d]] + alpha[d].sqrt() * eps[[i, d]]).collect();
            let mut by_dist: Vec<(f64, usize)> = (0..n)
                .map(|j| {
                    let d2: f64 = (0..m).map(|d| (pop.x[[j, d]] - s[d]).powi(2)).sum();
                    (d2, j)
                })
                .collect();
            by_dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let rows: Vec<usize> = by_dist[..k].iter().map(|p| p.1).collect();
            let sub = pop.x.select(ndarray::Axis(0), &rows);
            let w = kernel_weights(&s, alpha, sub.view());
            let mi: f64 = w.iter().zip(&rows).map(|(w, &j)| w * mu[j]).sum();
            total += mi * mi;
        }
    }
    -total / (c.mc_samples * n) as f64
}

fn random_pop(id: &str, n: usize, m: usize, seed: u64) -> (PopulationDataset, Array1<f64>) {
    let inst = GradcheckInstance::random(1, n, m, seed).unwrap();
    let p = inst.data.populations[0].clone();
    let pop = PopulationDataset::new(id, p.x, p.y).unwrap();
    (pop, inst.cache.values[0].clone())
}

fn single(pop: PopulationDataset, mu: Array1<f64>) -> (MultiPopulationData, MuCache) {
    let names = (0..pop.n_features()).map(|i| format!("x{i}")).collect();
    let id = pop.id.clone();
    let data = MultiPopulationData::new(names, "y", vec![pop]).unwrap();
    let cache = MuCache {
        population_ids: vec![id],
        values: vec![mu],
    };
    (data, cache)
}

#[test]
fn matches_naive_reference_full_and_truncated() {
    let (pop, mu) = random_pop("A", 25, 4, 3);
    let alpha = [0.3, 1.7, 0.05, 4.0];
    for k in [25, 6, 1] {
        let c = cfg(3, k);
        let fast = population_loss(&AlphaVector::new(alpha.to_vec()).unwrap(), &pop, &mu, &c, 2).unwrap();
        let slow = naive_loss(&alpha, &pop, &mu, &c, 2);
        assert!((fast - slow).abs() < 1e-10, "k={k}: {fast} vs {slow}");
    }
}

#[test]
fn single_row_loss_is_negative_mu_squared() {
    let pop = PopulationDataset::new("A", array![[0.4, -1.0]], array![2.0]).unwrap();
    let mu = array![1.5];
    for a in [1e-6, 0.3, 1.0, 1e6] {
        let alpha = AlphaVector::new(vec![a, 2.0 * a]).unwrap();
        let l = population_loss(&alpha, &pop, &mu, &cfg(5, 1), 1).unwrap();
        assert_eq!(l, -2.25);
    }
}

#[test]
fn symmetric_means_vanish_under_huge_noise() {
    let pop = PopulationDataset::new("A", array![[-1.0], [1.0]], array![1.0, -1.0]).unwrap();
    let mu = array![1.0, -1.0];
    let alpha = AlphaVector::new(vec![1e6]).unwrap();
    let l = population_loss(&alpha, &pop, &mu, &cfg(10, 2), 1).unwrap();
    assert!(l.abs() < 1e-3, "{l}");
}

#[test]
fn tiny_noise_recovers_mean_square() {
    let x = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [3.0, -2.0]];
    let mu = array![0.5, -1.0, 2.0, 0.25];
    let pop = PopulationDataset::new("A", x, mu.clone()).unwrap();
    let alpha = AlphaVector::new(vec![1e-4, 1e-4]).unwrap();
    let l = population_loss(&alpha, &pop, &mu, &cfg(4, 4), 1).unwrap();
    let target = -mu.mapv(|v| v * v).mean().unwrap();
    assert!((l - target).abs() < 1e-3, "{l} vs {target}");
}

#[test]
fn neighbors_above_rows_is_an_error_for_single_population() {
    let (pop, mu) = random_pop("A", 5, 2, 1);
    let alpha = AlphaVector::filled(2, 1.0).unwrap();
    assert!(population_loss(&alpha, &pop, &mu, &cfg(1, 6), 1).is_err());
    assert!(population_loss_and_gradient(&alpha, &pop, &mu, &cfg(1, 6), 1).is_ok());
}

#[test]
fn mismatched_alpha_length_is_rejected() {
    let inst = GradcheckInstance::random(2, 6, 3, 0).unwrap();
    let alpha = AlphaVector::filled(2, 1.0).unwrap();
    assert!(total_objective(&alpha, &inst.data, &inst.cache, &cfg(2, 6), 1).is_err());
}

#[test]
fn constant_feature_gets_only_regularizer_gradient() {
    let (pop, mu) = random_pop("A", 15, 3, 9);
    let mut x = pop.x.clone();
    x.column_mut(1).fill(0.7);
    let pop = PopulationDataset::new("A", x, pop.y).unwrap();
    let (data, cache) = single(pop, mu);
    let c = ObjectiveConfig { lambda: 0.3, ..cfg(4, 15) };
    let alpha = AlphaVector::new(vec![0.5, 2.0, 1.3]).unwrap();
    let g = objective_gradient(&alpha, &data, &cache, &c, 3).unwrap();
    let reg = -0.3 / (3.8f64 * 3.8);
    assert!((g[1] - reg).abs() < 1e-8, "{} vs {reg}", g[1]);
}

#[test]
fn lambda_zero_and_single_population_collapse() {
    let (pop, mu) = random_pop("A", 12, 3, 4);
    let (data, cache) = single(pop.clone(), mu.clone());
    let alpha = AlphaVector::new(vec![0.4, 1.0, 2.5]).unwrap();
    let c = ObjectiveConfig { lambda: 0.0, ..cfg(3, 12) };
    let v = total_objective(&alpha, &data, &cache, &c, 5).unwrap();
    let l = population_loss(&alpha, &pop, &mu, &c, 5).unwrap();
    assert_eq!(v.total, v.aggregate);
    assert_eq!(v.aggregate, l);
    let soft = ObjectiveConfig { aggregation: Aggregation::Softmax(2.0), ..c };
    let vs = total_objective(&alpha, &data, &cache, &soft, 5).unwrap();
    assert!((vs.aggregate - l).abs() < 1e-15);
}

#[test]
fn population_order_does_not_matter() {
    let inst = GradcheckInstance::random(3, 10, 3, 11).unwrap();
    let mut rev = inst.data.clone();
    rev.populations.reverse();
    let mut rcache = inst.cache.clone();
    rcache.population_ids.reverse();
    rcache.values.reverse();
    let alpha = AlphaVector::new(vec![0.2, 1.0, 3.0]).unwrap();
    for agg in [Aggregation::Hardmax, Aggregation::Softmax(1.5)] {
        let c = ObjectiveConfig { aggregation: agg, ..cfg(3, 10) };
        let (a, ga) = evaluate(&alpha, &inst.data, &inst.cache, &c, 2).unwrap();
        let (b, gb) = evaluate(&alpha, &rev, &rcache, &c, 2).unwrap();
        assert!((a.total - b.total).abs() < 1e-12);
        for (x, y) in ga.iter().zip(&gb) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn same_inputs_same_bits() {
    let inst = GradcheckInstance::random(2, 10, 4, 5).unwrap();
    let alpha = AlphaVector::new(vec![0.2, 1.0, 3.0, 0.7]).unwrap();
    let c = cfg(4, 6);
    let a = evaluate(&alpha, &inst.data, &inst.cache, &c, 9).unwrap();
    let b = evaluate(&alpha, &inst.data, &inst.cache, &c, 9).unwrap();
    assert_eq!(a, b);
    let other = evaluate(&alpha, &inst.data, &inst.cache, &c, 10).unwrap();
    assert_ne!(a.0.total, other.0.total);
}

#[test]
fn gradcheck_passes_for_each_aggregation() {
    let inst = GradcheckInstance::random(3, 20, 5, 1).unwrap();
    let points = random_alpha_points(5, 4, 0.1, 5.0, 2);
    for agg in [Aggregation::Hardmax, Aggregation::Softmax(0.5), Aggregation::Softmax(20.0)] {
        let c = ObjectiveConfig { aggregation: agg, ..cfg(4, 20) };
        let r = run_gradcheck(&inst, &c, 1, &points, DEFAULT_TOLERANCE).unwrap();
        assert!(r.passed, "{agg:?}: {}", r.max_rel_error);
    }
}

#[test]
fn gradcheck_passes_with_neighbor_truncation() {
    let inst = GradcheckInstance::random(2, 20, 3, 8).unwrap();
    let points = random_alpha_points(3, 4, 0.1, 5.0, 3);
    let c = cfg(3, 7);
    let r = run_gradcheck(&inst, &c, 1, &points, DEFAULT_TOLERANCE).unwrap();
    assert!(r.passed, "{}", r.max_rel_error);
}

#[test]
fn corrupted_gradient_is_caught() {
    let inst = GradcheckInstance::random(3, 20, 5, 1).unwrap();
    let points = random_alpha_points(5, 3, 0.1, 5.0, 2);
    let c = cfg(4, 20);
    let r = check_gradient(
        &inst,
        &c,
        1,
        &points,
        |a| {
            let mut g = objective_gradient(a, &inst.data, &inst.cache, &c, 1)?;
            g[2] *= 1.01;
            Ok(g)
        },
        DEFAULT_TOLERANCE,
    )
    .unwrap();
    assert!(!r.passed);
}

#[test]
fn taylor_remainder_is_second_order() {
    let inst = GradcheckInstance::random(2, 15, 4, 21).unwrap();
    let c = ObjectiveConfig { aggregation: Aggregation::Softmax(3.0), ..cfg(3, 15) };
    let alpha = vec![0.6, 1.4, 0.3, 2.2];
    let dir = [0.3, -0.2, 0.1, 0.5];
    let f = |a: &[f64]| {
        total_objective(&AlphaVector::new(a.to_vec()).unwrap(), &inst.data, &inst.cache, &c, 4)
            .unwrap()
            .total
    };
    let g = objective_gradient(&AlphaVector::new(alpha.clone()).unwrap(), &inst.data, &inst.cache, &c, 4).unwrap();
    let slope: f64 = g.iter().zip(&dir).map(|(g, d)| g * d).sum();
    let rem = |h: f64| {
        let moved: Vec<f64> = alpha.iter().zip(&dir).map(|(a, d)| a + h * d).collect();
        (f(&moved) - f(&alpha) - h * slope).abs()
    };
    let (r1, r2) = (rem(1e-2), rem(5e-3));
    let ratio = r1 / r2;
    assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn loss_within_mean_square_bounds(
        seed in 0u64..1000,
        a in proptest::collection::vec(1e-3f64..50.0, 3),
    ) {
        let (pop, mu) = random_pop("A", 10, 3, seed);
        let alpha = AlphaVector::new(a).unwrap();
        let l = population_loss(&alpha, &pop, &mu, &cfg(2, 10), 1).unwrap();
        let max_sq = mu.iter().map(|v| v * v).fold(0.0, f64::max);
        prop_assert!(l <= 0.0);
        prop_assert!(l >= -max_sq * (1.0 + 1e-12));
    }

    #[test]
    fn loss_scales_quadratically_in_mu(seed in 0u64..1000, c in -5.0f64..5.0) {
        let (pop, mu) = random_pop("A", 8, 2, seed);
        let alpha = AlphaVector::new(vec![0.5, 1.5]).unwrap();
        let base = population_loss(&alpha, &pop, &mu, &cfg(2, 8), 1).unwrap();
        let scaled = population_loss(&alpha, &pop, &(&mu * c), &cfg(2, 8), 1).unwrap();
        prop_assert!((scaled - c * c * base).abs() <= 1e-10 * (1.0 + base.abs() * c * c));
    }
}

#[test]
fn softmax_large_beta_matches_hardmax_value() {
    let inst = GradcheckInstance::random(3, 12, 3, 30).unwrap();
    let alpha = AlphaVector::new(vec![0.5, 1.0, 2.0]).unwrap();
    let hard = total_objective(&alpha, &inst.data, &inst.cache, &cfg(3, 12), 1).unwrap();
    let l = &hard.per_population_losses;
    let mut sorted = l.clone();
    sorted.sort_by(f64::total_cmp);
    assert!(sorted[2] - sorted[1] > 1e-4, "losses not separated: {l:?}");
    let soft_cfg = ObjectiveConfig { aggregation: Aggregation::Softmax(1e6), ..cfg(3, 12) };
    let soft = total_objective(&alpha, &inst.data, &inst.cache, &soft_cfg, 1).unwrap();
    assert!((soft.aggregate - hard.aggregate).abs() < 1e-6);
}

