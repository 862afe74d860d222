//! Multi-population tabular data.

mod csv_io;
mod split;
mod standardize;
pub mod synthetic;

pub use csv_io::{load_csv, read_csv, write_csv};
pub use split::{split_dataset, split_sizes, SplitBundle};
pub use standardize::{standardize, ColumnStats, Scope, StandardizationParams};
pub use synthetic::{generate_synthetic, SyntheticDataset, SyntheticSpec};

use ndarray::{concatenate, Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows drawn from one population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationDataset {
    pub id: String,
    pub x: Array2<f64>,
    pub y: Array1<f64>,
}

impl PopulationDataset {
    pub fn new(id: impl Into<String>, x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::invalid_data("population id must be non-empty"));
        }
        if x.nrows() != y.len() {
            return Err(Error::invalid_data(format!(
                "population `{id}`: X has {} rows but y has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        if x.nrows() == 0 {
            return Err(Error::invalid_data(format!("population `{id}` has no rows")));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid_data(format!(
                "population `{id}` contains non-finite values"
            )));
        }
        Ok(Self { id, x, y })
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    /// Rows at `indices`, in the given order.
    pub fn take_rows(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            self.id.clone(),
            self.x.select(Axis(0), indices),
            self.y.select(Axis(0), indices),
        )
    }

    pub fn select_columns(&self, columns: &[usize]) -> Self {
        Self {
            id: self.id.clone(),
            x: self.x.select(Axis(1), columns),
            y: self.y.clone(),
        }
    }
}

/// Named populations sharing one feature schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiPopulationData {
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub populations: Vec<PopulationDataset>,
}

impl MultiPopulationData {
    pub fn new(
        feature_names: Vec<String>,
        target_name: impl Into<String>,
        populations: Vec<PopulationDataset>,
    ) -> Result<Self> {
        let m = feature_names.len();
        if m == 0 {
            return Err(Error::invalid_data("at least one feature is required"));
        }
        if populations.is_empty() {
            return Err(Error::invalid_data("at least one population is required"));
        }
        for (i, p) in populations.iter().enumerate() {
            if p.n_features() != m {
                return Err(Error::invalid_data(format!(
                    "population `{}` has {} features, schema has {m}",
                    p.id,
                    p.n_features()
                )));
            }
            if populations[..i].iter().any(|q| q.id == p.id) {
                return Err(Error::invalid_data(format!(
                    "duplicate population id `{}`",
                    p.id
                )));
            }
        }
        Ok(Self {
            feature_names,
            target_name: target_name.into(),
            populations,
        })
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_populations(&self) -> usize {
        self.populations.len()
    }

    pub fn total_rows(&self) -> usize {
        self.populations.iter().map(|p| p.n_rows()).sum()
    }

    pub fn population(&self, id: &str) -> Option<&PopulationDataset> {
        self.populations.iter().find(|p| p.id == id)
    }

    pub fn population_ids(&self) -> Vec<&str> {
        self.populations.iter().map(|p| p.id.as_str()).collect()
    }

    /// Stacks every population. Also returns the population index of each row.
    pub fn pooled(&self) -> (Array2<f64>, Array1<f64>, Vec<usize>) {
        let xs: Vec<_> = self.populations.iter().map(|p| p.x.view()).collect();
        let ys: Vec<_> = self.populations.iter().map(|p| p.y.view()).collect();
        let x = concatenate(Axis(0), &xs).expect("populations share a schema");
        let y = concatenate(Axis(0), &ys).expect("1-d targets");
        let groups = self
            .populations
            .iter()
            .enumerate()
            .flat_map(|(g, p)| std::iter::repeat_n(g, p.n_rows()))
            .collect();
        (x, y, groups)
    }

    /// Keeps only `columns` (in that order).
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::invalid_arg("column selection is empty"));
        }
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.n_features()) {
            return Err(Error::invalid_arg(format!(
                "column {bad} out of range for {} features",
                self.n_features()
            )));
        }
        Ok(Self {
            feature_names: columns
                .iter()
                .map(|&c| self.feature_names[c].clone())
                .collect(),
            target_name: self.target_name.clone(),
            populations: self
                .populations
                .iter()
                .map(|p| p.select_columns(columns))
                .collect(),
        })
    }
}
