//! Kernel-form robust objective over per-feature noise variances.
//!
//! For population `p` with cached conditional means `mu_p(X_j)`:
//!
//! ```text
//! L_p(alpha) = -E_S[ (sum_j w_j(S, alpha) mu_p(X_j))^2 ]
//! total      = aggregate_p L_p(alpha) + lambda * Reg(alpha)
//! ```
//!
//! `L_p` equals the Bayes-optimal squared error of predicting `Y` from the
//! noisy view `S`, minus terms that do not depend on `alpha`. Noise for
//! replicate `l` of population `p` at epoch `t` comes from a stream keyed by
//! `(seed, t, p, l)`, so a value and a gradient at the same epoch see the same
//! draws.

mod aggregate;
mod alpha;
pub mod gradcheck;
mod kernel;
mod population;
mod regularizer;

pub use aggregate::{aggregate_losses, aggregation_gradient, argmax, Aggregation};
pub use alpha::{AlphaVector, ALPHA_MIN};
pub use kernel::kernel_weights;
pub use population::replicate_noise;
pub use regularizer::{regularizer, RegularizerKind};

use serde::{Deserialize, Serialize};

use crate::data::{MultiPopulationData, PopulationDataset};
use crate::error::{Error, Result};
use crate::mu_model::MuCache;
use population::{population_term, NoiseKey, PopulationInput};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObjectiveConfig {
    /// Monte Carlo replicates `b` per population and epoch.
    pub mc_samples: usize,
    /// Kernel sums run over at most this many nearest rows; populations with
    /// fewer rows use all of them.
    pub neighbors: usize,
    pub aggregation: Aggregation,
    pub lambda: f64,
    pub regularizer: RegularizerKind,
    pub seed: u64,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            mc_samples: 10,
            neighbors: 1000,
            aggregation: Aggregation::Hardmax,
            lambda: 10.0,
            regularizer: RegularizerKind::ReciprocalL1,
            seed: 0,
        }
    }
}

impl ObjectiveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mc_samples == 0 {
            return Err(Error::invalid_arg("mc_samples must be >= 1"));
        }
        if self.neighbors == 0 {
            return Err(Error::invalid_arg("neighbors must be >= 1"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid_arg("lambda must be finite and >= 0"));
        }
        if let Aggregation::Softmax(beta) = self.aggregation {
            if beta.is_nan() || beta <= 0.0 {
                return Err(Error::invalid_arg("softmax beta must be > 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub per_population_losses: Vec<f64>,
    pub aggregate: f64,
    pub regularizer: f64,
    pub total: f64,
}

fn check_alpha(alpha: &AlphaVector, m: usize) -> Result<()> {
    if alpha.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: alpha.len(),
        });
    }
    Ok(())
}

fn input<'a>(pop: &'a PopulationDataset, mu: &'a ndarray::Array1<f64>) -> Result<PopulationInput<'a>> {
    if mu.len() != pop.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: pop.n_rows(),
            got: mu.len(),
        });
    }
    Ok(PopulationInput {
        id: &pop.id,
        x: pop.x.view(),
        mu: mu.view(),
    })
}

fn key(cfg: &ObjectiveConfig, epoch: u64) -> NoiseKey {
    NoiseKey {
        seed: cfg.seed,
        epoch,
        replicates: cfg.mc_samples,
    }
}

/// Loss of a single population with exactly `cfg.neighbors` kernel terms per
/// noisy row. Errors when `cfg.neighbors` exceeds the population's rows.
pub fn population_loss(
    alpha: &AlphaVector,
    pop: &PopulationDataset,
    mu: &ndarray::Array1<f64>,
    cfg: &ObjectiveConfig,
    epoch: u64,
) -> Result<f64> {
    cfg.validate()?;
    check_alpha(alpha, pop.n_features())?;
    if cfg.neighbors > pop.n_rows() {
        return Err(Error::invalid_arg(format!(
            "neighbors = {} exceeds the {} rows of population `{}`",
            cfg.neighbors,
            pop.n_rows(),
            pop.id
        )));
    }
    let inp = input(pop, mu)?;
    Ok(population_term(alpha, &inp, cfg.neighbors, &key(cfg, epoch), false).loss)
}

/// Same as [`population_loss`], also returning the gradient in `alpha`.
pub fn population_loss_and_gradient(
    alpha: &AlphaVector,
    pop: &PopulationDataset,
    mu: &ndarray::Array1<f64>,
    cfg: &ObjectiveConfig,
    epoch: u64,
) -> Result<(f64, Vec<f64>)> {
    cfg.validate()?;
    check_alpha(alpha, pop.n_features())?;
    let inp = input(pop, mu)?;
    let k = cfg.neighbors.min(pop.n_rows());
    let t = population_term(alpha, &inp, k, &key(cfg, epoch), true);
    Ok((t.loss, t.grad.expect("requested")))
}

fn prepared<'a>(
    data: &'a MultiPopulationData,
    cache: &'a MuCache,
) -> Result<Vec<PopulationInput<'a>>> {
    cache.check_against(data)?;
    data.populations
        .iter()
        .map(|p| input(p, cache.get(&p.id).expect("checked")))
        .collect()
}

fn losses_only(
    alpha: &AlphaVector,
    inputs: &[PopulationInput<'_>],
    cfg: &ObjectiveConfig,
    epoch: u64,
) -> Vec<f64> {
    let key = key(cfg, epoch);
    inputs
        .iter()
        .map(|p| population_term(alpha, p, cfg.neighbors.min(p.x.nrows()), &key, false).loss)
        .collect()
}

fn assemble(losses: Vec<f64>, alpha: &AlphaVector, cfg: &ObjectiveConfig) -> ObjectiveValue {
    let aggregate = aggregate_losses(&losses, cfg.aggregation);
    let (reg, _) = regularizer(alpha, cfg.regularizer);
    ObjectiveValue {
        per_population_losses: losses,
        aggregate,
        regularizer: reg,
        total: aggregate + cfg.lambda * reg,
    }
}

pub fn total_objective(
    alpha: &AlphaVector,
    data: &MultiPopulationData,
    cache: &MuCache,
    cfg: &ObjectiveConfig,
    epoch: u64,
) -> Result<ObjectiveValue> {
    cfg.validate()?;
    check_alpha(alpha, data.n_features())?;
    let inputs = prepared(data, cache)?;
    Ok(assemble(losses_only(alpha, &inputs, cfg, epoch), alpha, cfg))
}

/// Objective value and its exact gradient for the noise realized at `epoch`.
///
/// Under the hard max only the worst population is differentiated (lowest
/// index on ties); under softmax every population contributes through the
/// aggregation weights.
pub fn evaluate(
    alpha: &AlphaVector,
    data: &MultiPopulationData,
    cache: &MuCache,
    cfg: &ObjectiveConfig,
    epoch: u64,
) -> Result<(ObjectiveValue, Vec<f64>)> {
    cfg.validate()?;
    check_alpha(alpha, data.n_features())?;
    let inputs = prepared(data, cache)?;
    let key = key(cfg, epoch);
    let m = data.n_features();
    let k_for = |p: &PopulationInput<'_>| cfg.neighbors.min(p.x.nrows());

    let (losses, pop_grads): (Vec<f64>, Vec<Option<Vec<f64>>>) = match cfg.aggregation {
        Aggregation::Hardmax => {
            let losses = losses_only(alpha, &inputs, cfg, epoch);
            let worst = argmax(&losses);
            let mut grads = vec![None; inputs.len()];
            let t = population_term(alpha, &inputs[worst], k_for(&inputs[worst]), &key, true);
            debug_assert_eq!(t.loss, losses[worst]);
            grads[worst] = t.grad;
            (losses, grads)
        }
        Aggregation::Softmax(_) => inputs
            .iter()
            .map(|p| {
                let t = population_term(alpha, p, k_for(p), &key, true);
                (t.loss, t.grad)
            })
            .unzip(),
    };

    let weights = aggregation_gradient(&losses, cfg.aggregation);
    let (_, reg_grad) = regularizer(alpha, cfg.regularizer);
    let mut grad: Vec<f64> = reg_grad.iter().map(|g| cfg.lambda * g).collect();
    for (w, g) in weights.iter().zip(&pop_grads) {
        if let Some(g) = g {
            for d in 0..m {
                grad[d] += w * g[d];
            }
        }
    }
    Ok((assemble(losses, alpha, cfg), grad))
}

pub fn objective_gradient(
    alpha: &AlphaVector,
    data: &MultiPopulationData,
    cache: &MuCache,
    cfg: &ObjectiveConfig,
    epoch: u64,
) -> Result<Vec<f64>> {
    evaluate(alpha, data, cache, cfg, epoch).map(|(_, g)| g)
}
