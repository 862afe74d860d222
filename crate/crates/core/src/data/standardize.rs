use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::{MultiPopulationData, PopulationDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// One set of statistics over every population stacked together.
    Pooled,
    /// Separate statistics for each population.
    PerPopulation,
}

/// Location/scale of the features and target within one scope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub target_mean: f64,
    pub target_std: f64,
    /// Feature columns with zero spread; their std is reported as 1.
    pub constant_columns: Vec<usize>,
    pub constant_target: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub scope: Scope,
    /// Population ids the entries of `stats` belong to. Empty when pooled.
    pub population_ids: Vec<String>,
    pub stats: Vec<ColumnStats>,
}

fn mean_std(col: ArrayView1<f64>) -> (f64, f64, bool) {
    let n = col.len() as f64;
    let mean = col.sum() / n;
    let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    if std <= 1e-12 * mean.abs().max(1.0) {
        (mean, 1.0, true)
    } else {
        (mean, std, false)
    }
}

impl ColumnStats {
    fn fit(x: ArrayView2<f64>, y: ArrayView1<f64>) -> Self {
        let mut means = Vec::with_capacity(x.ncols());
        let mut stds = Vec::with_capacity(x.ncols());
        let mut constant_columns = Vec::new();
        for (j, col) in x.axis_iter(Axis(1)).enumerate() {
            let (m, s, constant) = mean_std(col);
            means.push(m);
            stds.push(s);
            if constant {
                constant_columns.push(j);
            }
        }
        let (target_mean, target_std, constant_target) = mean_std(y);
        Self {
            means,
            stds,
            target_mean,
            target_std,
            constant_columns,
            constant_target,
        }
    }

    fn transform(&self, p: &PopulationDataset) -> Result<PopulationDataset> {
        if p.n_features() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                got: p.n_features(),
            });
        }
        let mut x: Array2<f64> = p.x.clone();
        for (j, mut col) in x.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.means[j], self.stds[j]);
            col.mapv_inplace(|v| (v - m) / s);
        }
        let y: Array1<f64> = p.y.mapv(|v| (v - self.target_mean) / self.target_std);
        PopulationDataset::new(p.id.clone(), x, y)
    }

    fn inverse(&self, p: &PopulationDataset) -> Result<PopulationDataset> {
        let mut x: Array2<f64> = p.x.clone();
        for (j, mut col) in x.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.means[j], self.stds[j]);
            col.mapv_inplace(|v| v * s + m);
        }
        let y = p.y.mapv(|v| v * self.target_std + self.target_mean);
        PopulationDataset::new(p.id.clone(), x, y)
    }

    /// Maps a standardized target value back to original units.
    pub fn unscale_target(&self, v: f64) -> f64 {
        v * self.target_std + self.target_mean
    }
}

impl StandardizationParams {
    pub fn fit(data: &MultiPopulationData, scope: Scope) -> Self {
        match scope {
            Scope::Pooled => {
                let (x, y, _) = data.pooled();
                Self {
                    scope,
                    population_ids: Vec::new(),
                    stats: vec![ColumnStats::fit(x.view(), y.view())],
                }
            }
            Scope::PerPopulation => Self {
                scope,
                population_ids: data.populations.iter().map(|p| p.id.clone()).collect(),
                stats: data
                    .populations
                    .iter()
                    .map(|p| ColumnStats::fit(p.x.view(), p.y.view()))
                    .collect(),
            },
        }
    }

    fn stats_for(&self, id: &str) -> Result<&ColumnStats> {
        match self.scope {
            Scope::Pooled => Ok(&self.stats[0]),
            Scope::PerPopulation => self
                .population_ids
                .iter()
                .position(|p| p == id)
                .map(|i| &self.stats[i])
                .ok_or_else(|| {
                    Error::invalid_data(format!("no standardization statistics for `{id}`"))
                }),
        }
    }

    /// True when some column (or the target) had zero spread in scope.
    pub fn has_warnings(&self) -> bool {
        self.stats
            .iter()
            .any(|s| !s.constant_columns.is_empty() || s.constant_target)
    }

    pub fn apply(&self, data: &MultiPopulationData) -> Result<MultiPopulationData> {
        let pops = data
            .populations
            .iter()
            .map(|p| self.stats_for(&p.id)?.transform(p))
            .collect::<Result<Vec<_>>>()?;
        MultiPopulationData::new(data.feature_names.clone(), data.target_name.clone(), pops)
    }

    pub fn invert(&self, data: &MultiPopulationData) -> Result<MultiPopulationData> {
        let pops = data
            .populations
            .iter()
            .map(|p| self.stats_for(&p.id)?.inverse(p))
            .collect::<Result<Vec<_>>>()?;
        MultiPopulationData::new(data.feature_names.clone(), data.target_name.clone(), pops)
    }
}

/// Z-scores features and target (population std, divisor n) within `scope`.
pub fn standardize(
    data: &MultiPopulationData,
    scope: Scope,
) -> Result<(MultiPopulationData, StandardizationParams)> {
    let params = StandardizationParams::fit(data, scope);
    let out = params.apply(data)?;
    Ok((out, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};
    use proptest::prelude::*;

    fn single(x: Array2<f64>, y: Array1<f64>) -> MultiPopulationData {
        let m = x.ncols();
        MultiPopulationData::new(
            (0..m).map(|i| format!("x{i}")).collect(),
            "y",
            vec![PopulationDataset::new("A", x, y).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn z_scores_of_one_two_three() {
        let d = single(array![[1.0], [2.0], [3.0]], array![1.0, 2.0, 3.0]);
        let (s, p) = standardize(&d, Scope::Pooled).unwrap();
        let z = 1.5f64.sqrt(); // (3-2)/sqrt(2/3)
        let got = s.populations[0].x.column(0).to_vec();
        for (g, e) in got.iter().zip([-z, 0.0, z]) {
            assert!((g - e).abs() < 1e-12);
        }
        assert!((got[2] - 1.2247).abs() < 1e-4);
        assert!(!p.has_warnings());
    }

    #[test]
    fn constant_column_maps_to_zero_with_warning() {
        let d = single(array![[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]], array![1.0, 2.0, 3.0]);
        let (s, p) = standardize(&d, Scope::Pooled).unwrap();
        assert_eq!(s.populations[0].x.column(0).to_vec(), vec![0.0; 3]);
        assert!(p.has_warnings());
        assert_eq!(p.stats[0].constant_columns, vec![0]);
        assert_eq!(p.stats[0].stds[0], 1.0);
    }

    #[test]
    fn idempotent_on_standardized_input() {
        let d = single(
            array![[0.3, 10.0], [1.7, -2.0], [-4.0, 3.5], [2.2, 0.0]],
            array![1.0, -1.0, 0.5, 2.0],
        );
        let (once, _) = standardize(&d, Scope::Pooled).unwrap();
        let (twice, _) = standardize(&once, Scope::Pooled).unwrap();
        for (a, b) in once.populations[0].x.iter().zip(twice.populations[0].x.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn per_population_scope_standardizes_each_group() {
        let a = PopulationDataset::new("A", array![[1.0], [3.0]], array![0.0, 2.0]).unwrap();
        let b = PopulationDataset::new("B", array![[100.0], [300.0]], array![10.0, 30.0]).unwrap();
        let d = MultiPopulationData::new(vec!["x".into()], "y", vec![a, b]).unwrap();
        let (s, p) = standardize(&d, Scope::PerPopulation).unwrap();
        assert_eq!(p.stats.len(), 2);
        for pop in &s.populations {
            assert_eq!(pop.x.column(0).to_vec(), vec![-1.0, 1.0]);
            assert_eq!(pop.y.to_vec(), vec![-1.0, 1.0]);
        }
    }

    proptest! {
        #[test]
        fn standardized_columns_have_zero_mean_unit_std(
            vals in proptest::collection::vec(-1e3f64..1e3, 6..40)
        ) {
            let n = vals.len() / 2;
            let x = Array2::from_shape_vec((n, 2), vals[..2 * n].to_vec()).unwrap();
            let y = x.column(0).to_owned() * 2.0 - x.column(1).to_owned();
            let d = single(x, y);
            let (s, p) = standardize(&d, Scope::Pooled).unwrap();
            for (j, col) in s.populations[0].x.axis_iter(Axis(1)).enumerate() {
                if p.stats[0].constant_columns.contains(&j) { continue; }
                let mean = col.sum() / n as f64;
                let std = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
                prop_assert!(mean.abs() < 1e-10);
                prop_assert!((std - 1.0).abs() < 1e-10);
            }
            let back = p.invert(&s).unwrap();
            for (a, b) in back.populations[0].x.iter().zip(d.populations[0].x.iter()) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
            for (a, b) in back.populations[0].y.iter().zip(d.populations[0].y.iter()) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
        }
    }
}
