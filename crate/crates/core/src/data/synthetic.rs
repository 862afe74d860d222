//! Synthetic multi-population regression benchmarks.
//!
//! | id | populations (share) | outcome |
//! |----|---------------------|---------|
//! | 1  | A 40, B 35, C 25 | linear, sign-flipped effects between A and B |
//! | 2  | A 40, B 35, C 25, D 15 (normalized) | nonlinear, heterogeneous noise |
//! | 3  | A 35, B 35, C 30 | sparse linear over an autoregressive feature chain |
//!
//! Base covariates are i.i.d. standard normal for datasets 1 and 2. Dataset 3
//! draws `X_0 ~ N(0, 1)` and `X_{i+1} = 0.3 X_i + 0.7 eta`.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use super::{MultiPopulationData, PopulationDataset};
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SyntheticDataset {
    Linear = 1,
    Nonlinear = 2,
    SparseCorrelated = 3,
}

impl SyntheticDataset {
    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Self::Linear),
            2 => Ok(Self::Nonlinear),
            3 => Ok(Self::SparseCorrelated),
            _ => Err(Error::invalid_arg(format!(
                "unknown synthetic dataset {id}; expected 1, 2 or 3"
            ))),
        }
    }

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn min_dim(self) -> usize {
        match self {
            Self::Linear => 15,
            Self::Nonlinear | Self::SparseCorrelated => 50,
        }
    }

    pub fn population_ids(self) -> &'static [&'static str] {
        match self {
            Self::Linear | Self::SparseCorrelated => &["A", "B", "C"],
            Self::Nonlinear => &["A", "B", "C", "D"],
        }
    }

    fn weights(self) -> &'static [f64] {
        match self {
            Self::Linear => &[40.0, 35.0, 25.0],
            Self::Nonlinear => &[40.0, 35.0, 25.0, 15.0],
            Self::SparseCorrelated => &[35.0, 35.0, 30.0],
        }
    }

    /// Row counts per population for `n_total` rows. The last population
    /// absorbs rounding.
    pub fn population_sizes(self, n_total: usize) -> Vec<usize> {
        let w = self.weights();
        let total: f64 = w.iter().sum();
        let mut sizes: Vec<usize> = w[..w.len() - 1]
            .iter()
            .map(|wi| (n_total as f64 * wi / total).round() as usize)
            .collect();
        let used: usize = sizes.iter().sum();
        sizes.push(n_total.saturating_sub(used));
        sizes
    }

    /// Features with a nonzero effect in at least one population.
    pub fn signal_features(self) -> Vec<usize> {
        match self {
            Self::Linear => (0..=10).collect(),
            Self::Nonlinear => vec![0, 1, 2, 3, 4, 5, 6, 7],
            Self::SparseCorrelated => vec![0, 5, 10, 15, 20, 25, 30, 35, 40, 45],
        }
    }

    /// Noise-free outcome `E[Y | X = x]` for population index `pop`.
    ///
    /// For population B of dataset 2 the noise is heteroscedastic in
    /// `X_3, X_4` but mean-zero, so they do not enter the mean.
    pub fn conditional_mean(self, pop: usize, x: &[f64]) -> f64 {
        match (self, pop) {
            (Self::Linear, 0) => 8.0 * x[0] + 6.0 * x[1] - 4.0 * x[2] + 3.0 * x[3] + 2.0 * x[4],
            (Self::Linear, 1) => {
                -8.0 * x[0] - 6.0 * x[1] + 4.0 * x[2] - 3.0 * x[3] - 2.0 * x[4]
                    + 8.0 * x[5]
                    + 6.0 * x[6]
            }
            (Self::Linear, _) => 10.0 * x[7] + 8.0 * x[8] + 6.0 * x[9] - 5.0 * x[10],
            (Self::Nonlinear, 0 | 1) => 4.0 * x[0] + 3.0 * x[1] + x[2] * x[2],
            (Self::Nonlinear, 2) => 2.0 * x[0] + 3.0 * x[5] * x[6] + 4.0 * (2.0 * x[7]).sin(),
            (Self::Nonlinear, _) => 3.0 * x[0] + 2.0 * x[1],
            (Self::SparseCorrelated, 0) => 5.0 * x[0] + 4.0 * x[15] + 3.0 * x[30],
            (Self::SparseCorrelated, 1) => 6.0 * x[5] + 5.0 * x[20] + 4.0 * x[35],
            (Self::SparseCorrelated, _) => {
                7.0 * x[10] + 6.0 * x[25] + 5.0 * x[40] + 4.0 * x[45]
            }
        }
    }

    fn noise<R: Rng>(self, pop: usize, x: &[f64], rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        match (self, pop) {
            (Self::Nonlinear, 0) => 0.05 * z,
            (Self::Nonlinear, 1) => (0.5 * x[3] + 0.3 * x[4]).exp() * z * 0.1,
            (Self::Nonlinear, 3) => {
                let t = StudentT::new(3.0).expect("3 degrees of freedom");
                0.2 * t.sample(rng)
            }
            _ => 0.1 * z,
        }
    }

    fn covariates<R: Rng>(self, row: &mut [f64], rng: &mut R) {
        match self {
            Self::SparseCorrelated => {
                row[0] = StandardNormal.sample(rng);
                for i in 1..row.len() {
                    let eta: f64 = StandardNormal.sample(rng);
                    row[i] = 0.3 * row[i - 1] + 0.7 * eta;
                }
            }
            _ => row
                .iter_mut()
                .for_each(|v| *v = StandardNormal.sample(rng)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub dataset: SyntheticDataset,
    pub n_total: usize,
    pub dim: usize,
    pub seed: u64,
    /// Multiplier on every noise term; 0 gives noiseless outcomes.
    pub noise_scale: f64,
}

impl SyntheticSpec {
    pub fn new(dataset: SyntheticDataset, n_total: usize, dim: usize, seed: u64) -> Self {
        Self {
            dataset,
            n_total,
            dim,
            seed,
            noise_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let need = self.dataset.min_dim();
        if self.dim < need {
            return Err(Error::invalid_arg(format!(
                "dim {} below required {need} for synthetic dataset {}",
                self.dim,
                self.dataset.id()
            )));
        }
        if self.n_total < 100 {
            return Err(Error::invalid_arg(format!(
                "n_total {} below the minimum of 100",
                self.n_total
            )));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::invalid_arg("noise_scale must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<MultiPopulationData> {
        self.validate()?;
        let ds = self.dataset;
        let m = self.dim;
        let sizes = ds.population_sizes(self.n_total);
        let mut populations = Vec::with_capacity(sizes.len());
        for (p, (&n, id)) in sizes.iter().zip(ds.population_ids()).enumerate() {
            let mut rng = rng::stream(Domain::Synthetic, &[self.seed, ds.id() as u64, p as u64]);
            let mut x = Array2::<f64>::zeros((n, m));
            let mut y = Array1::<f64>::zeros(n);
            for (mut row, yi) in x.rows_mut().into_iter().zip(y.iter_mut()) {
                let r = row.as_slice_mut().expect("standard layout");
                ds.covariates(r, &mut rng);
                let eps = ds.noise(p, r, &mut rng);
                *yi = ds.conditional_mean(p, r) + self.noise_scale * eps;
            }
            populations.push(PopulationDataset::new(*id, x, y)?);
        }
        MultiPopulationData::new((0..m).map(|i| format!("x{i}")).collect(), "y", populations)
    }
}

/// Generates synthetic dataset `dataset_id` (1, 2 or 3) with unit noise scale.
pub fn generate_synthetic(
    dataset_id: u8,
    n_total: usize,
    dim: usize,
    seed: u64,
) -> Result<MultiPopulationData> {
    SyntheticSpec::new(SyntheticDataset::from_id(dataset_id)?, n_total, dim, seed).generate()
}
