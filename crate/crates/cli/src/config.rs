use std::fmt;
use std::path::{Path, PathBuf};

use drfs::baselines::{DroLassoConfig, LassoConfig};
use drfs::data::{Scope, SyntheticDataset, SyntheticSpec};
use drfs::evaluation::DownstreamConfig;
use drfs::mu_model::MuSpec;
use drfs::objective::{Aggregation, ObjectiveConfig};
use drfs::optimizer::OptimizerConfig;
use drfs::pipeline::{Method, PipelineSettings};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Synthetic {
        dataset: u8,
        n_total: usize,
        dim: usize,
        #[serde(default)]
        seed: u64,
    },
    Csv {
        path: PathBuf,
        population_column: String,
        target_column: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineToggles {
    pub lasso: bool,
    pub dro_lasso: bool,
    /// Random subsets drawn per seed; 0 disables the random baseline.
    pub random_subsets: usize,
}

impl Default for BaselineToggles {
    fn default() -> Self {
        Self {
            lasso: true,
            dro_lasso: true,
            random_subsets: 10,
        }
    }
}

/// Everything a run needs. Serialized back verbatim into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    /// Number of features to select.
    pub budget: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub baselines: BaselineToggles,
    #[serde(default)]
    pub mu: MuSpec,
    #[serde(default = "default_target_scope")]
    pub objective_target_scope: Scope,
    #[serde(default)]
    pub objective: ObjectiveConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub lasso: LassoConfig,
    #[serde(default)]
    pub dro_lasso: DroLassoConfig,
    #[serde(default)]
    pub downstream: DownstreamConfig,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_target_scope() -> Scope {
    Scope::PerPopulation
}

impl ExperimentConfig {
    /// A synthetic-data config with library defaults everywhere else.
    pub fn synthetic(dataset: u8, n_total: usize, dim: usize, budget: usize) -> Self {
        Self {
            data: DataSource::Synthetic {
                dataset,
                n_total,
                dim,
                seed: 0,
            },
            budget,
            seeds: default_seeds(),
            output_dir: None,
            baselines: BaselineToggles::default(),
            mu: MuSpec::default(),
            objective_target_scope: default_target_scope(),
            objective: ObjectiveConfig::default(),
            optimizer: OptimizerConfig::default(),
            lasso: LassoConfig::default(),
            dro_lasso: DroLassoConfig::default(),
            downstream: DownstreamConfig::default(),
        }
    }

    pub fn pipeline_settings(&self) -> PipelineSettings {
        PipelineSettings {
            mu: self.mu,
            objective: self.objective.clone(),
            optimizer: self.optimizer.clone(),
            lasso: self.lasso,
            dro_lasso: self.dro_lasso,
            objective_target_scope: self.objective_target_scope,
        }
    }

    /// Our method first, then the enabled baselines.
    pub fn methods(&self) -> Vec<Method> {
        let mut m = vec![Method::Drfs];
        if self.baselines.lasso {
            m.push(Method::Lasso);
        }
        if self.baselines.dro_lasso {
            m.push(Method::DroLasso);
        }
        if self.baselines.random_subsets > 0 {
            m.push(Method::Random {
                subsets: self.baselines.random_subsets,
            });
        }
        m
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Toml,
        }
    }
}

/// Parses a config, reporting syntax errors with their line and column.
pub fn parse_config(text: &str, format: Format) -> Result<ExperimentConfig, CliError> {
    match format {
        Format::Json => serde_json::from_str(text).map_err(|e| CliError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }),
        Format::Toml => toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| line_col(text, s.start))
                .unwrap_or((0, 0));
            CliError::Syntax {
                line,
                column,
                message: e.message().to_string(),
            }
        }),
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, Format::from_path(path))
}

/// One problem with a config, tied to the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn csv_feature_count(path: &Path, pop: &str, target: &str) -> Result<usize, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| e.to_string())?;
    let headers = rdr.headers().map_err(|e| e.to_string())?;
    for col in [pop, target] {
        if !headers.iter().any(|h| h == col) {
            return Err(format!("column `{col}` not found"));
        }
    }
    Ok(headers.len() - 2)
}

/// Lists every violation in `cfg`; empty means valid.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut bad = |field: &str, message: String| {
        out.push(Diagnostic {
            field: field.to_string(),
            message,
        })
    };

    let n_features = match &cfg.data {
        DataSource::Synthetic {
            dataset,
            n_total,
            dim,
            seed,
        } => match SyntheticDataset::from_id(*dataset) {
            Err(_) => {
                bad("data.dataset", format!("unknown synthetic dataset {dataset}; expected 1, 2 or 3"));
                None
            }
            Ok(ds) => {
                if *dim < ds.min_dim() {
                    bad("data.dim", format!("dim below required {}", ds.min_dim()));
                }
                if let Err(e) = SyntheticSpec::new(ds, *n_total, (*dim).max(ds.min_dim()), *seed).validate() {
                    bad("data.n_total", e.to_string());
                }
                Some(*dim)
            }
        },
        DataSource::Csv {
            path,
            population_column,
            target_column,
        } => {
            if !path.is_file() {
                bad("data.path", format!("file {} does not exist", path.display()));
                None
            } else {
                match csv_feature_count(path, population_column, target_column) {
                    Ok(m) => Some(m),
                    Err(e) => {
                        bad("data.path", e);
                        None
                    }
                }
            }
        }
    };

    if cfg.budget == 0 {
        bad("budget", "budget must be >= 1".into());
    } else if let Some(m) = n_features {
        if cfg.budget > m {
            bad("budget", format!("budget {} exceeds the {m} available features", cfg.budget));
        }
    }
    if cfg.seeds.is_empty() {
        bad("seeds", "at least one seed is required".into());
    }

    if let Err(e) = cfg.mu.validate() {
        bad("mu", e.to_string());
    }
    if let Err(e) = cfg.downstream.model.validate() {
        bad("downstream.model", e.to_string());
    }

    let o = &cfg.objective;
    if o.mc_samples == 0 {
        bad("objective.mc_samples", "must be >= 1".into());
    }
    if o.neighbors == 0 {
        bad("objective.neighbors", "must be >= 1".into());
    }
    if !(o.lambda >= 0.0 && o.lambda.is_finite()) {
        bad("objective.lambda", format!("must be finite and >= 0, got {}", o.lambda));
    }
    if let Aggregation::Softmax(beta) = o.aggregation {
        if beta.is_nan() || beta <= 0.0 {
            bad("objective.aggregation", format!("softmax beta must be > 0, got {beta}"));
        }
    }

    let p = &cfg.optimizer;
    if p.epochs == 0 {
        bad("optimizer.epochs", "must be >= 1".into());
    }
    if !(p.learning_rate > 0.0 && p.learning_rate.is_finite()) {
        bad("optimizer.learning_rate", "must be finite and > 0".into());
    }
    if !(p.lr_min >= 0.0 && p.lr_min <= p.learning_rate) {
        bad("optimizer.lr_min", "must lie in [0, learning_rate]".into());
    }
    for (field, v) in [("optimizer.adam_beta1", p.adam_beta1), ("optimizer.adam_beta2", p.adam_beta2)] {
        if !(0.0..1.0).contains(&v) {
            bad(field, format!("must lie in [0, 1), got {v}"));
        }
    }
    if p.adam_eps.is_nan() || p.adam_eps <= 0.0 {
        bad("optimizer.adam_eps", "must be > 0".into());
    }
    if !p.init_center.is_finite() {
        bad("optimizer.init_center", "must be finite".into());
    }
    if !(p.init_noise_std >= 0.0 && p.init_noise_std.is_finite()) {
        bad("optimizer.init_noise_std", "must be finite and >= 0".into());
    }

    for (field, l) in [("lasso", &cfg.lasso), ("dro_lasso.lasso", &cfg.dro_lasso.lasso)] {
        if !(l.lambda >= 0.0 && l.lambda.is_finite()) {
            bad(&format!("{field}.lambda"), format!("must be finite and >= 0, got {}", l.lambda));
        }
        if l.tol.is_nan() || l.tol < 0.0 {
            bad(&format!("{field}.tol"), "must be >= 0".into());
        }
        if l.max_iter == 0 {
            bad(&format!("{field}.max_iter"), "must be >= 1".into());
        }
    }
    if !(cfg.dro_lasso.eta >= 0.0 && cfg.dro_lasso.eta.is_finite()) {
        bad("dro_lasso.eta", "must be finite and >= 0".into());
    }
    if cfg.dro_lasso.rounds == 0 {
        bad("dro_lasso.rounds", "must be >= 1".into());
    }
    out
}
