//! Conditional mean estimators `mu_p(x) ~ E[Y | X = x]`.
//!
//! One model is fit per population on its feature-selection rows and then
//! frozen. The objective only ever reads the cached predictions at the
//! training rows ([`MuCache`]).


use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::data::{MultiPopulationData, PopulationDataset};
use crate::error::{Error, Result};
use crate::linalg::solve_spd;

/// Estimator family and hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MuSpec {
    /// Mean of the `k` nearest training targets (Euclidean, ties to the lower row).
    Knn { k: usize },
    /// Ridge regression with intercept; `penalty` multiplies the identity.
    Ridge { penalty: f64 },
}

impl Default for MuSpec {
    fn default() -> Self {
        MuSpec::Knn { k: 10 }
    }
}

impl MuSpec {
    /// Clamps a knn neighbor count to the available rows.
    pub fn clamped_to(self, n_rows: usize) -> Self {
        match self {
            MuSpec::Knn { k } => MuSpec::Knn {
                k: k.min(n_rows).max(1),
            },
            other => other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MuSpec::Knn { k: 0 } => Err(Error::invalid_arg("knn k must be >= 1")),
            MuSpec::Ridge { penalty } if !(penalty >= 0.0 && penalty.is_finite()) => {
                Err(Error::invalid_arg("ridge penalty must be finite and >= 0"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionalMeanModel {
    Knn {
        k: usize,
        x: Array2<f64>,
        y: Array1<f64>,
    },
    Ridge {
        penalty: f64,
        coefficients: Array1<f64>,
        intercept: f64,
    },
}

pub fn fit_conditional_mean(pop: &PopulationDataset, spec: MuSpec) -> Result<ConditionalMeanModel> {
    fit_xy(pop.x.view(), pop.y.view(), spec)
}

pub fn fit_xy(x: ArrayView2<f64>, y: ArrayView1<f64>, spec: MuSpec) -> Result<ConditionalMeanModel> {
    spec.validate()?;
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    match spec {
        MuSpec::Knn { k } => {
            if n < k {
                return Err(Error::invalid_data(format!(
                    "knn with k = {k} needs at least {k} rows, got {n}"
                )));
            }
            Ok(ConditionalMeanModel::Knn {
                k,
                x: x.to_owned(),
                y: y.to_owned(),
            })
        }
        MuSpec::Ridge { penalty } => {
            if n < 2 {
                return Err(Error::invalid_data(format!(
                    "ridge needs at least 2 rows, got {n}"
                )));
            }
            let (coefficients, intercept) = ridge(x, y, penalty)?;
            Ok(ConditionalMeanModel::Ridge {
                penalty,
                coefficients,
                intercept,
            })
        }
    }
}

/// Centered ridge: `(Xc' Xc + penalty I) beta = Xc' yc`, intercept from the means.
fn ridge(x: ArrayView2<f64>, y: ArrayView1<f64>, penalty: f64) -> Result<(Array1<f64>, f64)> {
    let x_mean = x.mean_axis(Axis(0)).expect("n >= 2");
    let y_mean = y.mean().expect("n >= 2");
    let xc = &x - &x_mean;
    let yc = &y - y_mean;
    let mut gram = xc.t().dot(&xc);
    gram.diag_mut().mapv_inplace(|d| d + penalty);
    let rhs = xc.t().dot(&yc);
    let beta = solve_spd(&gram, &rhs)?;
    let intercept = y_mean - x_mean.dot(&beta);
    Ok((beta, intercept))
}

/// Indices of the `k` rows of `x` nearest to `q`, ordered by (distance, index).
pub fn nearest_rows(x: ArrayView2<f64>, q: ArrayView1<f64>, k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = x
        .rows()
        .into_iter()
        .enumerate()
        .map(|(j, r)| {
            let s = r
                .iter()
                .zip(q.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
            (s, j)
        })
        .collect();
    let by = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < d.len() {
        d.select_nth_unstable_by(k, by);
        d.truncate(k);
    }
    d.sort_unstable_by(by);
    d.into_iter().map(|(_, j)| j).collect()
}

impl ConditionalMeanModel {
    pub fn n_features(&self) -> usize {
        match self {
            Self::Knn { x, .. } => x.ncols(),
            Self::Ridge { coefficients, .. } => coefficients.len(),
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        if x.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: x.ncols(),
            });
        }
        Ok(match self {
            Self::Knn { k, x: train, y } => x
                .rows()
                .into_iter()
                .map(|q| {
                    let mut idx = nearest_rows(train.view(), q, *k);
                    idx.sort_unstable();
                    idx.iter().map(|&j| y[j]).sum::<f64>() / idx.len() as f64
                })
                .collect(),
            Self::Ridge {
                coefficients,
                intercept,
                ..
            } => x.dot(coefficients) + *intercept,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `mu_p` evaluated at every row of each population, in population order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuCache {
    pub population_ids: Vec<String>,
    pub values: Vec<Array1<f64>>,
}

impl MuCache {
    pub fn get(&self, id: &str) -> Option<&Array1<f64>> {
        self.population_ids
            .iter()
            .position(|p| p == id)
            .map(|i| &self.values[i])
    }

    /// Checks that the cache lines up row-for-row with `data`.
    pub fn check_against(&self, data: &MultiPopulationData) -> Result<()> {
        for p in &data.populations {
            let v = self.get(&p.id).ok_or_else(|| {
                Error::invalid_data(format!("no cached mu values for population `{}`", p.id))
            })?;
            if v.len() != p.n_rows() {
                return Err(Error::DimensionMismatch {
                    expected: p.n_rows(),
                    got: v.len(),
                });
            }
        }
        Ok(())
    }
}

/// Fits one model per population. knn neighbor counts are clamped to each
/// population's row count.
pub fn fit_population_models(
    data: &MultiPopulationData,
    spec: MuSpec,
) -> Result<Vec<ConditionalMeanModel>> {
    data.populations
        .iter()
        .map(|p| fit_conditional_mean(p, spec.clamped_to(p.n_rows())))
        .collect()
}

pub fn build_mu_cache(
    models: &[ConditionalMeanModel],
    data: &MultiPopulationData,
) -> Result<MuCache> {
    if models.len() != data.n_populations() {
        return Err(Error::DimensionMismatch {
            expected: data.n_populations(),
            got: models.len(),
        });
    }
    let values = models
        .iter()
        .zip(&data.populations)
        .map(|(m, p)| {
            let v = m.predict(p.x.view())?;
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Numerical(format!(
                    "non-finite mu prediction for population `{}`",
                    p.id
                )));
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MuCache {
        population_ids: data.populations.iter().map(|p| p.id.clone()).collect(),
        values,
    })
}
