use drfs::baselines::{dro_lasso, lasso_fit, lasso_rank, DroLassoConfig, LassoConfig};
use drfs::data::{MultiPopulationData, PopulationDataset};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn problem(n: usize, m: usize, seed: u64) -> (Array2<f64>, Array1<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_simple_fn((n, m), || rng.sample::<f64, _>(StandardNormal));
    let beta: Vec<f64> = (0..m).map(|j| if j % 3 == 0 { rng.random_range(-2.0..2.0) } else { 0.0 }).collect();
    let y = x.dot(&Array1::from(beta)) + Array1::from_shape_simple_fn(n, || 0.5 * rng.sample::<f64, _>(StandardNormal));
    let w = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
    (x, y, w)
}

fn cfg(lambda: f64) -> LassoConfig {
    LassoConfig {
        lambda,
        ..Default::default()
    }
}

#[test]
fn kkt_holds_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for seed in 0..50 {
        let n = rng.random_range(10..60);
        let m = rng.random_range(1..12);
        let lambda = rng.random_range(0.001..0.5);
        let (x, y, w) = problem(n, m, seed);
        let fit = lasso_fit(x.view(), y.view(), &w, &cfg(lambda)).unwrap();
        assert!(fit.converged, "seed {seed}");
        let worst = fit.kkt_residuals(x.view(), y.view(), &w).unwrap().into_iter().fold(0.0, f64::max);
        assert!(worst <= 1e-6, "seed {seed}: {worst}");
    }
}

#[test]
fn objective_never_increases_across_sweeps() {
    let (x, y, w) = problem(40, 9, 5);
    let mut prev = f64::INFINITY;
    for sweeps in 1..30 {
        let fit = lasso_fit(
            x.view(),
            y.view(),
            &w,
            &LassoConfig {
                lambda: 0.05,
                tol: 0.0,
                max_iter: sweeps,
            },
        )
        .unwrap();
        let obj = fit.objective(x.view(), y.view(), &w).unwrap();
        assert!(obj <= prev + 1e-14, "sweep {sweeps}: {obj} > {prev}");
        prev = obj;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn doubling_weights_changes_nothing(seed in 0u64..500, lambda in 0.0f64..0.3) {
        let (x, y, w) = problem(25, 5, seed);
        let w2: Vec<f64> = w.iter().map(|v| 2.0 * v).collect();
        let a = lasso_fit(x.view(), y.view(), &w, &cfg(lambda)).unwrap();
        let b = lasso_fit(x.view(), y.view(), &w2, &cfg(lambda)).unwrap();
        for (p, q) in a.coefficients.iter().zip(&b.coefficients) {
            prop_assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn dro_weights_are_probabilities(seed in 0u64..200, eta in 0.0f64..2.0) {
        let data = populations(seed, false);
        let res = dro_lasso(&data, &DroLassoConfig { eta, rounds: 6, ..Default::default() }).unwrap();
        prop_assert_eq!(res.weight_history.len(), 7);
        for w in &res.weight_history {
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(w.iter().all(|&v| v > 0.0));
        }
    }
}

fn populations(seed: u64, identical: bool) -> MultiPopulationData {
    let pops = (0..3)
        .map(|p| {
            let s = if identical { seed } else { seed * 10 + p };
            let (x, y, _) = problem(30, 4, s);
            PopulationDataset::new(format!("P{p}"), x, y).unwrap()
        })
        .collect();
    MultiPopulationData::new((0..4).map(|i| format!("x{i}")).collect(), "y", pops).unwrap()
}

#[test]
fn zero_eta_keeps_uniform_weights() {
    let data = populations(4, false);
    let res = dro_lasso(&data, &DroLassoConfig { eta: 0.0, ..Default::default() }).unwrap();
    for w in &res.weight_history {
        assert_eq!(w, &vec![1.0 / 3.0; 3]);
    }
}

#[test]
fn identical_populations_reduce_to_pooled_lasso() {
    let data = populations(8, true);
    let res = dro_lasso(&data, &DroLassoConfig::default()).unwrap();
    let (x, y, _) = data.pooled();
    let pooled = lasso_fit(x.view(), y.view(), &vec![1.0; x.nrows()], &cfg(0.01)).unwrap();
    for (a, b) in res.model.coefficients.iter().zip(&pooled.coefficients) {
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn rank_recovers_planted_support() {
    let (x, y, w) = problem(200, 9, 1);
    let fit = lasso_fit(x.view(), y.view(), &w, &cfg(0.01)).unwrap();
    let mut top = lasso_rank(&fit, 3).unwrap();
    top.sort();
    assert_eq!(top, vec![0, 3, 6]);
}
