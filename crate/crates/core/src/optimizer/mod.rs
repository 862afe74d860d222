//! Adam over the noise variances with a cosine-annealed step size.
//!
//! Each epoch evaluates the full-batch objective and its gradient at the
//! current `alpha` with fresh noise, takes one Adam step, and projects back to
//! `alpha >= ALPHA_MIN`. After the last epoch the features with the smallest
//! variances are the selection.

mod adam;
mod trace;

pub use adam::AdamState;
pub use trace::{write_traces_csv, EpochRecord, OptimizationTrace};

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::MultiPopulationData;
use crate::error::{Error, Result};
use crate::mu_model::MuCache;
use crate::objective::{evaluate, AlphaVector, ObjectiveConfig};
use crate::rng::{self, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrSchedule {
    #[default]
    Cosine,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub schedule: LrSchedule,
    pub lr_min: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub init_center: f64,
    pub init_noise_std: f64,
    pub seed: u64,
    /// Store an alpha snapshot every this many epochs (plus first and last).
    pub snapshot_every: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 0.1,
            schedule: LrSchedule::Cosine,
            lr_min: 0.0,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            init_center: 1.0,
            init_noise_std: 0.01,
            seed: 0,
            snapshot_every: 10,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid_arg("epochs must be >= 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid_arg("learning_rate must be finite and > 0"));
        }
        if !(self.lr_min >= 0.0 && self.lr_min <= self.learning_rate) {
            return Err(Error::invalid_arg("lr_min must lie in [0, learning_rate]"));
        }
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::invalid_arg(format!("{name} must lie in [0, 1)")));
            }
        }
        if self.adam_eps.is_nan() || self.adam_eps <= 0.0 {
            return Err(Error::invalid_arg("adam_eps must be > 0"));
        }
        if !(self.init_noise_std >= 0.0 && self.init_noise_std.is_finite()) {
            return Err(Error::invalid_arg("init_noise_std must be finite and >= 0"));
        }
        if !self.init_center.is_finite() {
            return Err(Error::invalid_arg("init_center must be finite"));
        }
        Ok(())
    }
}

/// `alpha_i = max(init_center + N(0, init_noise_std^2), ALPHA_MIN)`.
pub fn init_alpha(m: usize, cfg: &OptimizerConfig) -> Result<AlphaVector> {
    if m == 0 {
        return Err(Error::invalid_arg("alpha needs at least one feature"));
    }
    let mut rng = rng::stream(Domain::AlphaInit, &[cfg.seed]);
    let normal = Normal::new(0.0, cfg.init_noise_std)
        .map_err(|e| Error::invalid_arg(format!("init_noise_std: {e}")))?;
    AlphaVector::clamped(
        (0..m)
            .map(|_| cfg.init_center + normal.sample(&mut rng))
            .collect(),
    )
}

/// `lr_min + (lr - lr_min) (1 + cos(pi t / T)) / 2` for `0 <= t <= T`.
pub fn cosine_lr(t: usize, cfg: &OptimizerConfig) -> f64 {
    let total = cfg.epochs.max(1) as f64;
    let t = (t as f64).min(total);
    cfg.lr_min
        + 0.5 * (cfg.learning_rate - cfg.lr_min) * (1.0 + (std::f64::consts::PI * t / total).cos())
}

/// Step size for the update made in 1-based epoch `epoch`.
pub fn learning_rate(epoch: usize, cfg: &OptimizerConfig) -> f64 {
    match cfg.schedule {
        LrSchedule::Constant => cfg.learning_rate,
        LrSchedule::Cosine => cosine_lr(epoch.saturating_sub(1), cfg),
    }
}

/// Runs the full optimization. Deterministic given both configs' seeds.
pub fn optimize(
    data: &MultiPopulationData,
    cache: &MuCache,
    obj_cfg: &ObjectiveConfig,
    opt_cfg: &OptimizerConfig,
) -> Result<(AlphaVector, OptimizationTrace)> {
    opt_cfg.validate()?;
    obj_cfg.validate()?;
    cache.check_against(data)?;
    let m = data.n_features();
    let mut alpha = init_alpha(m, opt_cfg)?;
    let mut adam = AdamState::new(m);
    let epochs = opt_cfg.epochs.max(1);
    let mut trace = OptimizationTrace::new(
        data.populations.iter().map(|p| p.id.clone()).collect(),
        alpha.to_vec(),
    );

    for epoch in 1..=epochs {
        let (value, grad) = evaluate(&alpha, data, cache, obj_cfg, epoch as u64)?;
        if grad.iter().any(|g| !g.is_finite()) || !value.total.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite objective or gradient at epoch {epoch}"
            )));
        }
        let lr = learning_rate(epoch, opt_cfg);
        let delta = adam.step(&grad, lr, opt_cfg);
        alpha = adam::apply_step(&alpha, &delta)?;
        let snap = epoch == epochs
            || epoch == 1
            || (opt_cfg.snapshot_every > 0 && epoch % opt_cfg.snapshot_every == 0);
        trace.push(EpochRecord {
            epoch,
            lr,
            per_population_losses: value.per_population_losses,
            aggregate: value.aggregate,
            regularizer: value.regularizer,
            total: value.total,
            alpha: snap.then(|| alpha.to_vec()),
        });
    }
    Ok((alpha, trace))
}

/// The `k` features with the smallest variances, ordered by (alpha, index).
pub fn select_features(alpha: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > alpha.len() {
        return Err(Error::invalid_arg(format!(
            "budget k = {k} must lie in [1, {}]",
            alpha.len()
        )));
    }
    let mut idx: Vec<usize> = (0..alpha.len()).collect();
    idx.sort_by(|&a, &b| alpha[a].total_cmp(&alpha[b]).then(a.cmp(&b)));
    idx.truncate(k);
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::ALPHA_MIN;
    use proptest::prelude::*;

    #[test]
    fn noiseless_init_is_center() {
        let cfg = OptimizerConfig {
            init_noise_std: 0.0,
            ..Default::default()
        };
        assert_eq!(init_alpha(4, &cfg).unwrap().as_slice(), &[1.0; 4]);
    }

    #[test]
    fn init_near_five() {
        let cfg = OptimizerConfig {
            init_center: 5.0,
            init_noise_std: 0.01,
            ..Default::default()
        };
        let a = init_alpha(100, &cfg).unwrap();
        assert!(a.iter().all(|v| (4.5..=5.5).contains(v)));
    }

    #[test]
    fn zero_center_clamps_to_floor() {
        let cfg = OptimizerConfig {
            init_center: 0.0,
            init_noise_std: 0.0,
            ..Default::default()
        };
        assert_eq!(init_alpha(3, &cfg).unwrap().as_slice(), &[ALPHA_MIN; 3]);
    }

    #[test]
    fn cosine_endpoints_and_midpoint() {
        let cfg = OptimizerConfig {
            epochs: 200,
            learning_rate: 0.1,
            lr_min: 0.02,
            ..Default::default()
        };
        assert!((cosine_lr(0, &cfg) - 0.1).abs() < 1e-15);
        assert!((cosine_lr(200, &cfg) - 0.02).abs() < 1e-15);
        assert!((cosine_lr(100, &cfg) - 0.06).abs() < 1e-15);
    }

    #[test]
    fn selection_examples() {
        assert_eq!(select_features(&[0.1, 5.0, 0.2, 3.0], 2).unwrap(), vec![0, 2]);
        assert_eq!(select_features(&[1.0, 1.0, 2.0], 1).unwrap(), vec![0]);
        assert_eq!(select_features(&[0.1, 5.0, 0.2, 3.0], 4).unwrap(), vec![0, 2, 3, 1]);
        assert!(select_features(&[1.0], 0).is_err());
        assert!(select_features(&[1.0], 2).is_err());
    }

    proptest! {
        #[test]
        fn selection_is_rank_based(alpha in proptest::collection::vec(1e-3f64..10.0, 1..20), k in 1usize..20) {
            let k = k.min(alpha.len());
            let sel = select_features(&alpha, k).unwrap();
            let transformed: Vec<f64> = alpha.iter().map(|a| a.ln() * 3.0 + 7.0).collect();
            prop_assert_eq!(&sel, &select_features(&transformed, k).unwrap());
            if k < alpha.len() {
                let bigger = select_features(&alpha, k + 1).unwrap();
                prop_assert_eq!(&bigger[..k], &sel[..]);
            }
            let mut uniq = sel.clone();
            uniq.sort();
            uniq.dedup();
            prop_assert_eq!(uniq.len(), k);
        }
    }
}
