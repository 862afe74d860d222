//! Downstream harness: fresh per-population predictors on the selected
//! columns, trained on the downstream-train rows and scored on the
//! downstream-test rows.

mod table;

pub use table::{ComparisonRow, ComparisonTable};

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::data::{MultiPopulationData, SplitBundle};
use crate::error::{Error, Result};
use crate::mu_model::{fit_conditional_mean, MuSpec};
use crate::pipeline::{run_seed, Method, PipelineSettings, SeedRun};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DownstreamConfig {
    /// Trained separately on each population. knn neighbor counts are
    /// clamped to the training rows.
    pub model: MuSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationMetrics {
    pub population: String,
    pub mse: f64,
    /// `1 - mse / var(y_test)`; 0 when the test target is constant.
    pub r2: f64,
    pub n_test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub populations: Vec<PopulationMetrics>,
}

impl Metrics {
    pub fn worst_mse(&self) -> f64 {
        self.populations.iter().map(|p| p.mse).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn worst_r2(&self) -> f64 {
        self.populations.iter().map(|p| p.r2).fold(f64::INFINITY, f64::min)
    }

    pub fn get(&self, population: &str) -> Option<&PopulationMetrics> {
        self.populations.iter().find(|p| p.population == population)
    }
}

fn check_selection(selected: &[usize], m: usize) -> Result<()> {
    if selected.is_empty() {
        return Err(Error::invalid_arg("selection is empty"));
    }
    let mut seen = vec![false; m];
    for &j in selected {
        if j >= m {
            return Err(Error::invalid_arg(format!("feature index {j} out of range for {m} features")));
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::invalid_arg(format!("feature index {j} selected twice")));
        }
    }
    Ok(())
}

pub fn mse_r2(y: &Array1<f64>, pred: &Array1<f64>) -> (f64, f64) {
    let n = y.len() as f64;
    let mse = y.iter().zip(pred).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n;
    let mean = y.sum() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let r2 = if var > 0.0 { 1.0 - mse / var } else { 0.0 };
    (mse, r2)
}

pub fn downstream_evaluate(splits: &SplitBundle, selected: &[usize], cfg: &DownstreamConfig) -> Result<Metrics> {
    cfg.model.validate()?;
    check_selection(selected, splits.downstream_train.n_features())?;
    let train = splits.downstream_train.select_columns(selected)?;
    let test = splits.downstream_test.select_columns(selected)?;
    let populations = train
        .populations
        .iter()
        .map(|tr| {
            let te = test
                .population(&tr.id)
                .ok_or_else(|| Error::invalid_data(format!("population `{}` has no test split", tr.id)))?;
            if te.n_rows() < 1 {
                return Err(Error::invalid_data(format!("population `{}` has an empty test split", tr.id)));
            }
            let model = fit_conditional_mean(tr, cfg.model.clamped_to(tr.n_rows()))?;
            let pred = model.predict(te.x.view())?;
            let (mse, r2) = mse_r2(&te.y, &pred);
            Ok(PopulationMetrics {
                population: tr.id.clone(),
                mse,
                r2,
                n_test: te.n_rows(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Metrics { populations })
}

/// Metrics of one method at one seed: a single entry, or one per random subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub seed: u64,
    pub selections: Vec<Vec<usize>>,
    pub metrics: Vec<Metrics>,
}

impl MethodOutcome {
    /// Per-population MSE averaged over subsets.
    pub fn mean_mse(&self, population: &str) -> Option<f64> {
        let v: Option<Vec<f64>> = self.metrics.iter().map(|m| m.get(population).map(|p| p.mse)).collect();
        v.map(|v| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Worst-population MSE, averaged over subsets.
    pub fn worst_mse(&self) -> f64 {
        self.metrics.iter().map(Metrics::worst_mse).sum::<f64>() / self.metrics.len() as f64
    }
}

pub fn evaluate_method(run: &SeedRun, method: Method, k: usize, cfg: &DownstreamConfig) -> Result<MethodOutcome> {
    let selections = run.select(method, k)?;
    let metrics = selections
        .iter()
        .map(|s| downstream_evaluate(&run.splits.standardized, s, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(MethodOutcome {
        method,
        seed: run.seed(),
        selections,
        metrics,
    })
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub table: ComparisonTable,
    pub outcomes: Vec<MethodOutcome>,
    pub runs: Vec<SeedRun>,
}

/// Runs the full protocol for every seed and summarizes every method.
pub fn compare_methods(
    data: &MultiPopulationData,
    k: usize,
    methods: &[Method],
    seeds: &[u64],
    settings: &PipelineSettings,
    downstream: &DownstreamConfig,
) -> Result<Comparison> {
    if methods.is_empty() {
        return Err(Error::invalid_arg("no methods to compare"));
    }
    if seeds.is_empty() {
        return Err(Error::invalid_arg("no seeds"));
    }
    if k == 0 || k > data.n_features() {
        return Err(Error::invalid_arg(format!("budget k = {k} must lie in [1, {}]", data.n_features())));
    }
    let runs = seeds
        .iter()
        .map(|&s| run_seed(data, s, settings, methods))
        .collect::<Result<Vec<_>>>()?;
    summarize_runs(runs, k, methods, downstream)
}

/// Evaluates already computed seed runs, in the order given.
pub fn summarize_runs(runs: Vec<SeedRun>, k: usize, methods: &[Method], downstream: &DownstreamConfig) -> Result<Comparison> {
    let mut outcomes = Vec::with_capacity(runs.len() * methods.len());
    for run in &runs {
        for &method in methods {
            outcomes.push(evaluate_method(run, method, k, downstream)?);
        }
    }
    let ids: Vec<String> = runs
        .first()
        .map(|r| r.splits.standardized.downstream_test.populations.iter().map(|p| p.id.clone()).collect())
        .unwrap_or_default();
    let table = ComparisonTable::from_outcomes(&outcomes, methods, &ids);
    Ok(Comparison { table, outcomes, runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::PopulationDataset;
    use ndarray::{array, Array2};

    fn bundle(train: (Array2<f64>, Array1<f64>), test: (Array2<f64>, Array1<f64>)) -> SplitBundle {
        let wrap = |(x, y): (Array2<f64>, Array1<f64>)| {
            let m = x.ncols();
            MultiPopulationData::new(
                (0..m).map(|i| format!("x{i}")).collect(),
                "y",
                vec![PopulationDataset::new("A", x, y).unwrap()],
            )
            .unwrap()
        };
        let train = wrap(train);
        SplitBundle {
            feature_selection: train.clone(),
            downstream_train: train,
            downstream_test: wrap(test),
        }
    }

    #[test]
    fn exact_linear_fit() {
        let xtr = array![[0.0, 1.0], [1.0, -1.0], [2.0, 0.5], [3.0, 2.0], [-1.0, 0.0]];
        let ytr = xtr.column(0).mapv(|v| 3.0 * v - 1.0);
        let xte = array![[0.5, 9.0], [-2.0, 1.0]];
        let yte = xte.column(0).mapv(|v| 3.0 * v - 1.0);
        let b = bundle((xtr, ytr), (xte, yte));
        let m = downstream_evaluate(&b, &[0], &DownstreamConfig { model: MuSpec::Ridge { penalty: 0.0 } }).unwrap();
        assert!(m.populations[0].mse < 1e-10);
        assert!((m.populations[0].r2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn knn_over_all_rows_predicts_mean() {
        let xtr = array![[0.0], [1.0], [2.0], [3.0]];
        let ytr = array![1.0, 2.0, 3.0, 6.0];
        let xte = array![[0.2], [5.0]];
        let yte = array![1.0, 5.0];
        let b = bundle((xtr, ytr), (xte, yte));
        let m = downstream_evaluate(&b, &[0], &DownstreamConfig { model: MuSpec::Knn { k: 100 } }).unwrap();
        assert!((m.populations[0].mse - 4.0).abs() < 1e-12);
    }

    #[test]
    fn selection_errors() {
        let b = bundle((array![[0.0, 1.0], [1.0, 0.0]], array![0.0, 1.0]), (array![[0.0, 1.0]], array![0.0]));
        let cfg = DownstreamConfig::default();
        assert!(downstream_evaluate(&b, &[], &cfg).is_err());
        assert!(downstream_evaluate(&b, &[2], &cfg).is_err());
        assert!(downstream_evaluate(&b, &[1, 1], &cfg).is_err());
    }

    #[test]
    fn constant_test_target_has_zero_r2() {
        let (mse, r2) = mse_r2(&array![2.0, 2.0], &array![1.0, 3.0]);
        assert_eq!((mse, r2), (1.0, 0.0));
    }
}
