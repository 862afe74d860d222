//! Central finite differences in `log alpha` against the analytic gradient.
//!
//! Only objective *values* enter the numeric side, so it checks the gradient
//! code independently. Both sides use the same epoch and therefore the same
//! noise draws.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{objective_gradient, total_objective, AlphaVector, ObjectiveConfig};
use crate::data::{MultiPopulationData, PopulationDataset};
use crate::error::Result;
use crate::mu_model::{build_mu_cache, fit_population_models, MuCache, MuSpec};
use crate::rng::{self, Domain};

pub const DEFAULT_TOLERANCE: f64 = 1e-4;
pub const DEFAULT_LOG_STEP: f64 = 1e-4;

/// A small random problem: standard normal features and a nonlinear target,
/// with knn conditional means.
#[derive(Debug, Clone)]
pub struct GradcheckInstance {
    pub data: MultiPopulationData,
    pub cache: MuCache,
}

impl GradcheckInstance {
    pub fn random(populations: usize, rows: usize, features: usize, seed: u64) -> Result<Self> {
        let mut rng = rng::stream(Domain::Demo, &[seed, 0x6772_6164]);
        let mut pops = Vec::with_capacity(populations);
        for p in 0..populations {
            let coef: Vec<f64> = (0..features).map(|_| rng.random_range(-2.0..2.0)).collect();
            let x = Array2::from_shape_simple_fn((rows, features), || StandardNormal.sample(&mut rng));
            let y: ndarray::Array1<f64> = x
                .rows()
                .into_iter()
                .map(|r| {
                    let lin: f64 = r.iter().zip(&coef).map(|(a, c)| a * c).sum();
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let r0: f64 = r[0];
                    lin + (r0 * (p as f64 + 1.0)).sin() + 0.1 * z
                })
                .collect();
            pops.push(PopulationDataset::new(format!("P{p}"), x, y)?);
        }
        let data = MultiPopulationData::new(
            (0..features).map(|i| format!("x{i}")).collect(),
            "y",
            pops,
        )?;
        let models = fit_population_models(&data, MuSpec::Knn { k: 3 })?;
        let cache = build_mu_cache(&models, &data)?;
        Ok(Self { data, cache })
    }
}

/// `count` points drawn uniformly from `[lo, hi]^m`.
pub fn random_alpha_points(m: usize, count: usize, lo: f64, hi: f64, seed: u64) -> Vec<AlphaVector> {
    let mut rng = rng::stream(Domain::Demo, &[seed, 0x616c_7068]);
    (0..count)
        .map(|_| {
            AlphaVector::new((0..m).map(|_| rng.random_range(lo..=hi)).collect())
                .expect("positive range")
        })
        .collect()
}

/// `d f / d log(alpha_d)` by central differences with step `h` in log space.
pub fn log_alpha_finite_difference<F>(f: F, alpha: &AlphaVector, h: f64) -> Result<Vec<f64>>
where
    F: Fn(&AlphaVector) -> Result<f64>,
{
    let mut out = Vec::with_capacity(alpha.len());
    for d in 0..alpha.len() {
        let mut up = alpha.to_vec();
        up[d] *= h.exp();
        let mut dn = alpha.to_vec();
        dn[d] *= (-h).exp();
        let fu = f(&AlphaVector::new(up)?)?;
        let fd = f(&AlphaVector::new(dn)?)?;
        out.push((fu - fd) / (2.0 * h));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointCheck {
    pub alpha: Vec<f64>,
    /// `alpha_d * dF/dalpha_d` from the analytic gradient.
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    /// `max_d |numeric - analytic| / max(max_d |analytic|, max_d |numeric|)`.
    pub rel_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub points: Vec<PointCheck>,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn rel_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = a.iter().chain(b).map(|v| v.abs()).fold(1e-12, f64::max);
    diff / scale
}

/// Compares `gradient` against finite differences of the total objective at
/// every point. `gradient` is a parameter so a deliberately broken gradient
/// can be fed through the same harness.
pub fn check_gradient<G>(
    instance: &GradcheckInstance,
    cfg: &ObjectiveConfig,
    epoch: u64,
    points: &[AlphaVector],
    gradient: G,
    tolerance: f64,
) -> Result<GradcheckReport>
where
    G: Fn(&AlphaVector) -> Result<Vec<f64>>,
{
    let value = |a: &AlphaVector| {
        total_objective(a, &instance.data, &instance.cache, cfg, epoch).map(|v| v.total)
    };
    let mut checks = Vec::with_capacity(points.len());
    for alpha in points {
        let g = gradient(alpha)?;
        let analytic: Vec<f64> = g.iter().zip(alpha.iter()).map(|(g, a)| g * a).collect();
        let numeric = log_alpha_finite_difference(value, alpha, DEFAULT_LOG_STEP)?;
        checks.push(PointCheck {
            alpha: alpha.to_vec(),
            rel_error: rel_error(&analytic, &numeric),
            analytic,
            numeric,
        });
    }
    let max_rel_error = checks.iter().map(|c| c.rel_error).fold(0.0, f64::max);
    Ok(GradcheckReport {
        points: checks,
        max_rel_error,
        tolerance,
        passed: max_rel_error < tolerance,
    })
}

/// Finite-difference check of [`objective_gradient`].
pub fn run_gradcheck(
    instance: &GradcheckInstance,
    cfg: &ObjectiveConfig,
    epoch: u64,
    points: &[AlphaVector],
    tolerance: f64,
) -> Result<GradcheckReport> {
    check_gradient(
        instance,
        cfg,
        epoch,
        points,
        |a| objective_gradient(a, &instance.data, &instance.cache, cfg, epoch),
        tolerance,
    )
}
