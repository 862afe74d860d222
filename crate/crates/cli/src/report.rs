use std::collections::BTreeMap;

use drfs::evaluation::ComparisonRow;
use drfs::optimizer::OptimizationTrace;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

/// Bumped whenever the report layout changes incompatibly.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Platform {
    pub os: String,
    pub arch: String,
    pub family: String,
    pub pointer_width: u32,
}

impl Platform {
    pub fn current() -> Self {
        Self {
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            family: std::env::consts::FAMILY.to_string(),
            pointer_width: usize::BITS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub epochs: usize,
    pub initial_total: f64,
    pub final_total: f64,
    pub min_total: f64,
    pub final_per_population_losses: Vec<f64>,
    pub final_regularizer: f64,
}

impl TraceSummary {
    pub fn from_trace(t: &OptimizationTrace) -> Option<Self> {
        let first = t.epochs.first()?;
        let last = t.epochs.last()?;
        Some(Self {
            epochs: t.epochs.len(),
            initial_total: first.total,
            final_total: last.total,
            min_total: t.epochs.iter().map(|e| e.total).fold(f64::INFINITY, f64::min),
            final_per_population_losses: last.per_population_losses.clone(),
            final_regularizer: last.regularizer,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub final_alpha: Vec<f64>,
    /// Every feature, smallest noise variance first.
    pub ranked_features: Vec<usize>,
    /// Subsets per method; the random baseline has one entry per draw.
    pub selected: BTreeMap<String, Vec<Vec<usize>>>,
    pub trace: Option<TraceSummary>,
}

/// The deterministic part of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Results {
    pub budget: usize,
    pub feature_names: Vec<String>,
    pub population_ids: Vec<String>,
    pub seeds: Vec<SeedResult>,
    pub comparison: Vec<ComparisonRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedTiming {
    pub seed: u64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Timings {
    pub load_seconds: f64,
    pub seeds: Vec<SeedTiming>,
    pub evaluation_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub schema_version: u32,
    pub library_version: String,
    pub platform: Platform,
    pub config: ExperimentConfig,
    pub results: Results,
    pub timings: Timings,
}

impl SelectionReport {
    /// The numeric payload as JSON, for reproducibility comparisons.
    pub fn results_json(&self) -> serde_json::Result<String> {
        serde_json::to_string(&self.results)
    }
}
