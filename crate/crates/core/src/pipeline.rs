//! One seed of the experiment protocol: split, standardize, fit the
//! conditional means, optimize `alpha`, fit the Lasso baselines, and hand out
//! feature subsets for any budget.

use serde::{Deserialize, Serialize};

use crate::baselines::{dro_lasso, lasso_fit, lasso_rank, random_select, DroLassoConfig, DroLassoResult, LassoConfig, LassoModel};
use crate::data::{split_dataset, standardize, MultiPopulationData, Scope, SplitBundle, StandardizationParams};
use crate::error::{Error, Result};
use crate::mu_model::{build_mu_cache, fit_population_models, MuSpec};
use crate::objective::{AlphaVector, ObjectiveConfig};
use crate::optimizer::{optimize, select_features, OptimizationTrace, OptimizerConfig};
use crate::rng::{self, Domain};

/// A feature selection method under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Smallest optimized noise variances.
    Drfs,
    /// Largest pooled Lasso coefficients.
    Lasso,
    /// Largest coefficients after population reweighting.
    DroLasso,
    /// Uniform subsets; each seed averages over `subsets` draws.
    Random { subsets: usize },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Drfs => "drfs",
            Method::Lasso => "lasso",
            Method::DroLasso => "dro_lasso",
            Method::Random { .. } => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSettings {
    pub mu: MuSpec,
    pub objective: ObjectiveConfig,
    pub optimizer: OptimizerConfig,
    pub lasso: LassoConfig,
    pub dro_lasso: DroLassoConfig,
    /// Scaling of the target seen by the conditional mean models and the
    /// objective. Features always use the pooled scaling.
    pub objective_target_scope: Scope,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            mu: MuSpec::default(),
            objective: ObjectiveConfig::default(),
            optimizer: OptimizerConfig::default(),
            lasso: LassoConfig::default(),
            dro_lasso: DroLassoConfig::default(),
            objective_target_scope: Scope::PerPopulation,
        }
    }
}

/// Splits for one seed, z-scored with statistics of the pooled
/// feature-selection rows.
#[derive(Debug, Clone)]
pub struct PreparedSplits {
    pub seed: u64,
    pub raw: SplitBundle,
    pub standardized: SplitBundle,
    pub params: StandardizationParams,
}

pub fn prepare_splits(data: &MultiPopulationData, seed: u64) -> Result<PreparedSplits> {
    let raw = split_dataset(data, seed)?;
    let (feature_selection, params) = standardize(&raw.feature_selection, Scope::Pooled)?;
    let standardized = SplitBundle {
        feature_selection,
        downstream_train: params.apply(&raw.downstream_train)?,
        downstream_test: params.apply(&raw.downstream_test)?,
    };
    Ok(PreparedSplits {
        seed,
        raw,
        standardized,
        params,
    })
}

/// Everything fitted for one seed.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub splits: PreparedSplits,
    pub alpha: Option<AlphaVector>,
    pub trace: Option<OptimizationTrace>,
    pub lasso: Option<LassoModel>,
    pub dro_lasso: Option<DroLassoResult>,
}

impl SeedRun {
    pub fn seed(&self) -> u64 {
        self.splits.seed
    }

    pub fn n_features(&self) -> usize {
        self.splits.standardized.feature_selection.n_features()
    }

    /// Feature subsets chosen by `method` at budget `k`. A single subset for
    /// every method except [`Method::Random`].
    pub fn select(&self, method: Method, k: usize) -> Result<Vec<Vec<usize>>> {
        let missing = || Error::invalid_arg(format!("method `{}` was not run for this seed", method.name()));
        match method {
            Method::Drfs => Ok(vec![select_features(self.alpha.as_ref().ok_or_else(missing)?, k)?]),
            Method::Lasso => Ok(vec![lasso_rank(self.lasso.as_ref().ok_or_else(missing)?, k)?]),
            Method::DroLasso => Ok(vec![lasso_rank(&self.dro_lasso.as_ref().ok_or_else(missing)?.model, k)?]),
            Method::Random { subsets } => {
                if subsets == 0 {
                    return Err(Error::invalid_arg("random method needs at least one subset"));
                }
                (0..subsets as u64)
                    .map(|i| random_select(self.n_features(), k, rng::mix(Domain::RandomSelect, &[self.seed(), i])))
                    .collect()
            }
        }
    }
}

/// The `alpha` optimization on already prepared splits.
pub fn fit_alpha(
    splits: &PreparedSplits,
    settings: &PipelineSettings,
) -> Result<(AlphaVector, OptimizationTrace)> {
    let rescaled;
    let fs = match settings.objective_target_scope {
        Scope::Pooled => &splits.standardized.feature_selection,
        Scope::PerPopulation => {
            rescaled = rescale_targets(&splits.standardized.feature_selection)?;
            &rescaled
        }
    };
    let models = fit_population_models(fs, settings.mu)?;
    let cache = build_mu_cache(&models, fs)?;
    let objective = ObjectiveConfig {
        seed: splits.seed,
        ..settings.objective.clone()
    };
    let optimizer = OptimizerConfig {
        seed: splits.seed,
        ..settings.optimizer.clone()
    };
    optimize(fs, &cache, &objective, &optimizer)
}

/// Z-scores each population's target, leaving features untouched.
pub fn rescale_targets(data: &MultiPopulationData) -> Result<MultiPopulationData> {
    let (per_pop, _) = standardize(data, Scope::PerPopulation)?;
    let pops = data
        .populations
        .iter()
        .zip(per_pop.populations)
        .map(|(orig, scaled)| crate::data::PopulationDataset::new(orig.id.clone(), orig.x.clone(), scaled.y))
        .collect::<Result<Vec<_>>>()?;
    MultiPopulationData::new(data.feature_names.clone(), data.target_name.clone(), pops)
}

pub fn fit_lasso(splits: &PreparedSplits, cfg: &LassoConfig) -> Result<LassoModel> {
    let (x, y, _) = splits.standardized.feature_selection.pooled();
    lasso_fit(x.view(), y.view(), &vec![1.0; x.nrows()], cfg)
}

/// DRO-Lasso on the feature-selection rows, z-scored population by population.
pub fn fit_dro_lasso(splits: &PreparedSplits, cfg: &DroLassoConfig) -> Result<DroLassoResult> {
    let (per_pop, _) = standardize(&splits.raw.feature_selection, Scope::PerPopulation)?;
    dro_lasso(&per_pop, cfg)
}

/// Runs whatever `methods` need for `seed`. `settings.objective.seed` and
/// `settings.optimizer.seed` are replaced by `seed`.
pub fn run_seed(
    data: &MultiPopulationData,
    seed: u64,
    settings: &PipelineSettings,
    methods: &[Method],
) -> Result<SeedRun> {
    let splits = prepare_splits(data, seed)?;
    let wants = |f: fn(&Method) -> bool| methods.iter().any(f);
    let (alpha, trace) = if wants(|m| matches!(m, Method::Drfs)) {
        let (a, t) = fit_alpha(&splits, settings)?;
        (Some(a), Some(t))
    } else {
        (None, None)
    };
    let lasso = wants(|m| matches!(m, Method::Lasso))
        .then(|| fit_lasso(&splits, &settings.lasso))
        .transpose()?;
    let dro_lasso = wants(|m| matches!(m, Method::DroLasso))
        .then(|| fit_dro_lasso(&splits, &settings.dro_lasso))
        .transpose()?;
    Ok(SeedRun {
        splits,
        alpha,
        trace,
        lasso,
        dro_lasso,
    })
}
