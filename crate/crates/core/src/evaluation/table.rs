use std::io::Write;

use serde::{Deserialize, Serialize};

use super::MethodOutcome;
use crate::error::Result;
use crate::pipeline::Method;

/// Label of the per-seed worst population.
pub const WORST: &str = "worst";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub population: String,
    pub metric: String,
    pub mean: f64,
    /// Sample standard deviation across seeds; 0 for a single seed.
    pub std: f64,
    pub n_seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

fn avg(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

impl ComparisonTable {
    /// For each method entry (in order) and population: mean and std over
    /// seeds of MSE and R², followed by the worst population (largest MSE,
    /// smallest R², taken per seed). Random subsets are averaged within a
    /// seed first.
    pub fn from_outcomes(outcomes: &[MethodOutcome], methods: &[Method], populations: &[String]) -> Self {
        let mut rows = Vec::new();
        for method in methods {
            let mine: Vec<&MethodOutcome> = outcomes.iter().filter(|o| o.method == *method).collect();
            let mut seeds: Vec<u64> = mine.iter().map(|o| o.seed).collect();
            seeds.dedup();
            let per_seed: Vec<&MethodOutcome> = seeds
                .iter()
                .filter_map(|s| mine.iter().find(|o| o.seed == *s).copied())
                .collect();
            let mut push = |population: &str, metric: &str, values: Vec<f64>| {
                let (mean, std) = mean_std(&values);
                rows.push(ComparisonRow {
                    method: method.name().to_string(),
                    population: population.to_string(),
                    metric: metric.to_string(),
                    mean,
                    std,
                    n_seeds: values.len(),
                });
            };
            for pop in populations {
                let pick = |o: &MethodOutcome, f: fn(&super::PopulationMetrics) -> f64| {
                    avg(o.metrics.iter().filter_map(|m| m.get(pop)).map(f))
                };
                push(pop, "mse", per_seed.iter().map(|o| pick(o, |p| p.mse)).collect());
                push(pop, "r2", per_seed.iter().map(|o| pick(o, |p| p.r2)).collect());
            }
            push(WORST, "mse", per_seed.iter().map(|o| o.worst_mse()).collect());
            push(
                WORST,
                "r2",
                per_seed.iter().map(|o| avg(o.metrics.iter().map(|m| m.worst_r2()))).collect(),
            );
        }
        Self { rows }
    }

    pub fn get(&self, method: &str, population: &str, metric: &str) -> Option<&ComparisonRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.population == population && r.metric == metric)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for r in &self.rows {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.rows)?)
    }
}
