//! Weighted Lasso by cyclic coordinate descent:
//!
//! ```text
//! min_{b0, beta} (1 / (2 sum w)) sum_i w_i (y_i - b0 - x_i' beta)^2 + lambda ||beta||_1
//! ```
//!
//! The intercept is removed by centering at the weighted means.

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LassoConfig {
    pub lambda: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub converged: bool,
    pub sweeps: usize,
}

impl LassoModel {
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        if x.ncols() != self.coefficients.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coefficients.len(),
                got: x.ncols(),
            });
        }
        Ok(x.dot(&Array1::from(self.coefficients.clone())) + self.intercept)
    }

    /// The penalized objective above, at this model.
    pub fn objective(&self, x: ArrayView2<f64>, y: ArrayView1<f64>, weights: &[f64]) -> Result<f64> {
        let pred = self.predict(x)?;
        let wsum: f64 = weights.iter().sum();
        let fit: f64 = weights
            .iter()
            .zip(y.iter().zip(&pred))
            .map(|(w, (y, p))| w * (y - p).powi(2))
            .sum::<f64>()
            / (2.0 * wsum);
        Ok(fit + self.lambda * self.coefficients.iter().map(|b| b.abs()).sum::<f64>())
    }

    /// Per-coordinate optimality residual: for nonzero `beta_j` the distance of
    /// the normalized weighted correlation from `lambda sign(beta_j)`, for zero
    /// `beta_j` how far that correlation exceeds `lambda`.
    pub fn kkt_residuals(&self, x: ArrayView2<f64>, y: ArrayView1<f64>, weights: &[f64]) -> Result<Vec<f64>> {
        let pred = self.predict(x)?;
        let wsum: f64 = weights.iter().sum();
        let resid: Array1<f64> = weights
            .iter()
            .zip(y.iter().zip(&pred))
            .map(|(w, (y, p))| w * (y - p) / wsum)
            .collect();
        Ok(x.t()
            .dot(&resid)
            .iter()
            .zip(&self.coefficients)
            .map(|(g, &b)| {
                if b != 0.0 {
                    (g - self.lambda * b.signum()).abs()
                } else {
                    (g.abs() - self.lambda).max(0.0)
                }
            })
            .collect())
    }
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Fits the weighted Lasso. Returns with `converged = false` when `max_iter`
/// sweeps pass without the largest coefficient change dropping below `tol`.
pub fn lasso_fit(x: ArrayView2<f64>, y: ArrayView1<f64>, weights: &[f64], cfg: &LassoConfig) -> Result<LassoModel> {
    let (n, m) = x.dim();
    if n == 0 {
        return Err(Error::invalid_arg("lasso needs at least one row"));
    }
    if y.len() != n || weights.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if y.len() != n { y.len() } else { weights.len() },
        });
    }
    if !(cfg.lambda >= 0.0 && cfg.lambda.is_finite()) {
        return Err(Error::invalid_arg("lasso lambda must be finite and >= 0"));
    }
    if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::invalid_arg("sample weights must be finite and >= 0"));
    }
    let wsum: f64 = weights.iter().sum();
    if wsum <= 0.0 {
        return Err(Error::invalid_arg("sample weights are all zero"));
    }
    let w = Array1::from_iter(weights.iter().map(|v| v / wsum));

    let x_mean = x.t().dot(&w);
    let y_mean = y.dot(&w);
    let xc = &x - &x_mean.view().insert_axis(Axis(0));
    let mut resid = y.mapv(|v| v - y_mean);
    let xw = &xc * &w.view().insert_axis(Axis(1));
    let curv: Vec<f64> = (0..m).map(|j| xw.column(j).dot(&xc.column(j))).collect();

    let mut beta = vec![0.0; m];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < cfg.max_iter {
        sweeps += 1;
        let mut max_change = 0.0f64;
        for j in 0..m {
            if curv[j] <= 0.0 {
                continue;
            }
            let old = beta[j];
            let rho = xw.column(j).dot(&resid) + curv[j] * old;
            let new = soft_threshold(rho, cfg.lambda) / curv[j];
            if new != old {
                resid.scaled_add(old - new, &xc.column(j));
                beta[j] = new;
                max_change = max_change.max((new - old).abs());
            }
        }
        if max_change < cfg.tol {
            converged = true;
            break;
        }
    }
    let intercept = y_mean - x_mean.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>();
    Ok(LassoModel {
        coefficients: beta,
        intercept,
        lambda: cfg.lambda,
        converged,
        sweeps,
    })
}

/// The `k` features with the largest `|beta|`, ties by lower index.
pub fn lasso_rank(model: &LassoModel, k: usize) -> Result<Vec<usize>> {
    let m = model.coefficients.len();
    if k == 0 || k > m {
        return Err(Error::invalid_arg(format!("budget k = {k} must lie in [1, {m}]")));
    }
    let b = &model.coefficients;
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&i, &j| b[j].abs().total_cmp(&b[i].abs()).then(i.cmp(&j)));
    idx.truncate(k);
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn cfg(lambda: f64) -> LassoConfig {
        LassoConfig {
            lambda,
            ..Default::default()
        }
    }

    #[test]
    fn noiseless_ols() {
        let x = array![[1.0, 0.3], [2.0, -1.0], [-0.5, 0.2], [0.7, 2.0], [3.0, 0.0]];
        let y = x.column(0).mapv(|v| 2.0 * v);
        let fit = lasso_fit(x.view(), y.view(), &[1.0; 5], &cfg(0.0)).unwrap();
        assert!(fit.converged);
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-8);
        assert!(fit.coefficients[1].abs() < 1e-8);
    }

    #[test]
    fn scalar_soft_threshold() {
        let x0 = array![-1.5, -0.5, 0.0, 0.5, 1.5];
        let y0 = array![-1.0, 0.2, -0.4, 0.1, 1.1];
        let st = |v: &Array1<f64>| {
            let mu = v.mean().unwrap();
            let sd = v.mapv(|a| (a - mu).powi(2)).mean().unwrap().sqrt();
            v.mapv(|a| (a - mu) / sd)
        };
        let (xs, ys) = (st(&x0), st(&y0));
        let rho = xs.dot(&ys) / 5.0;
        let x = xs.clone().insert_axis(Axis(1));
        for lambda in [0.0, 0.1, 0.5, 0.99] {
            let fit = lasso_fit(x.view(), ys.view(), &[1.0; 5], &cfg(lambda)).unwrap();
            let expected = rho.signum() * (rho.abs() - lambda).max(0.0);
            assert!((fit.coefficients[0] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn shrinks_to_zero_above_threshold() {
        let x = array![[1.0, 0.3], [2.0, -1.0], [-0.5, 0.2], [0.7, 2.0]];
        let y = array![0.5, 1.0, -0.3, 0.9];
        let xc: Array2<f64> = &x - &x.mean_axis(Axis(0)).unwrap().insert_axis(Axis(0));
        let yc: Array1<f64> = &y - y.mean().unwrap();
        let lmax = xc.t().dot(&yc).iter().map(|v: &f64| v.abs() / 4.0).fold(0.0, f64::max);
        let fit = lasso_fit(x.view(), y.view(), &[1.0; 4], &cfg(lmax)).unwrap();
        assert!(fit.coefficients.iter().all(|&b| b == 0.0));
        assert!((fit.intercept - y.mean().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rank_examples() {
        let model = |b: Vec<f64>| LassoModel {
            coefficients: b,
            intercept: 0.0,
            lambda: 0.0,
            converged: true,
            sweeps: 1,
        };
        assert_eq!(lasso_rank(&model(vec![0.0, 3.0, -5.0]), 2).unwrap(), vec![2, 1]);
        assert_eq!(lasso_rank(&model(vec![0.0; 3]), 2).unwrap(), vec![0, 1]);
        let mut all = lasso_rank(&model(vec![0.1, -0.4, 0.2]), 3).unwrap();
        all.sort();
        assert_eq!(all, vec![0, 1, 2]);
        assert!(lasso_rank(&model(vec![1.0]), 2).is_err());
        assert!(lasso_rank(&model(vec![1.0]), 0).is_err());
    }

    #[test]
    fn rejects_bad_weights() {
        let x = Array2::<f64>::zeros((2, 1));
        let y = array![1.0, 2.0];
        assert!(lasso_fit(x.view(), y.view(), &[0.0, 0.0], &cfg(0.1)).is_err());
        assert!(lasso_fit(x.view(), y.view(), &[1.0, -1.0], &cfg(0.1)).is_err());
        assert!(lasso_fit(x.view(), y.view(), &[1.0], &cfg(0.1)).is_err());
    }

    #[test]
    fn reports_nonconvergence() {
        let x = array![[1.0, 0.99], [2.0, 2.01], [-0.5, -0.49], [0.7, 0.72]];
        let y = array![1.0, 2.0, -0.4, 0.8];
        let fit = lasso_fit(
            x.view(),
            y.view(),
            &[1.0; 4],
            &LassoConfig {
                lambda: 1e-4,
                tol: 1e-14,
                max_iter: 2,
            },
        )
        .unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.sweeps, 2);
    }
}
