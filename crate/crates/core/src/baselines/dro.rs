//! Group-reweighted Lasso: refit the pooled weighted Lasso, then raise each
//! population's weight by `exp(eta * loss_p)` and renormalize.

use ndarray::{concatenate, Array1, Axis};
use serde::{Deserialize, Serialize};

use super::lasso::{lasso_fit, LassoConfig, LassoModel};
use crate::data::MultiPopulationData;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DroLassoConfig {
    pub lasso: LassoConfig,
    pub eta: f64,
    pub rounds: usize,
}

impl Default for DroLassoConfig {
    fn default() -> Self {
        Self {
            lasso: LassoConfig::default(),
            eta: 0.1,
            rounds: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroLassoResult {
    /// The fit from the last round.
    pub model: LassoModel,
    /// Population weights, starting with the uniform ones; `rounds + 1` rows.
    pub weight_history: Vec<Vec<f64>>,
    /// Unweighted per-population MSE after each round's fit.
    pub loss_history: Vec<Vec<f64>>,
}

/// `w_p exp(eta loss_p)`, normalized to sum to one.
pub fn reweight(weights: &[f64], losses: &[f64], eta: f64) -> Vec<f64> {
    // Shift by the largest exponent so large losses cannot overflow.
    let logs: Vec<f64> = weights
        .iter()
        .zip(losses)
        .map(|(w, l)| w.ln() + eta * l)
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = logs.iter().map(|v| (v - top).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Runs the reweighting loop on `data`, which the caller is expected to have
/// standardized population by population.
pub fn dro_lasso(data: &MultiPopulationData, cfg: &DroLassoConfig) -> Result<DroLassoResult> {
    if !cfg.eta.is_finite() || cfg.eta < 0.0 {
        return Err(Error::invalid_arg("eta must be finite and >= 0"));
    }
    if cfg.rounds == 0 {
        return Err(Error::invalid_arg("rounds must be >= 1"));
    }
    let p_count = data.n_populations();
    let xs: Vec<_> = data.populations.iter().map(|p| p.x.view()).collect();
    let ys: Vec<_> = data.populations.iter().map(|p| p.y.view()).collect();
    let x = concatenate(Axis(0), &xs).expect("shared column count");
    let y = concatenate(Axis(0), &ys).expect("1-d");

    let mut weights = vec![1.0 / p_count as f64; p_count];
    let mut weight_history = vec![weights.clone()];
    let mut loss_history = Vec::with_capacity(cfg.rounds);
    let mut model = None;
    for _ in 0..cfg.rounds {
        let sample_w: Vec<f64> = data
            .populations
            .iter()
            .zip(&weights)
            .flat_map(|(p, &w)| std::iter::repeat_n(w, p.n_rows()))
            .collect();
        let fit = lasso_fit(x.view(), y.view(), &sample_w, &cfg.lasso)?;
        let losses = data
            .populations
            .iter()
            .map(|p| {
                let pred = fit.predict(p.x.view())?;
                let r: Array1<f64> = &p.y - &pred;
                Ok(r.dot(&r) / p.n_rows() as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        weights = reweight(&weights, &losses, cfg.eta);
        weight_history.push(weights.clone());
        loss_history.push(losses);
        model = Some(fit);
    }
    Ok(DroLassoResult {
        model: model.expect("at least one round"),
        weight_history,
        loss_history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_update() {
        let w = reweight(&[0.5, 0.5], &[1.0, 0.0], std::f64::consts::LN_2);
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((w[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_eta_is_identity() {
        let w = reweight(&[0.25; 4], &[3.0, 0.1, 7.0, 1.0], 0.0);
        assert_eq!(w, vec![0.25; 4]);
    }

    #[test]
    fn huge_losses_stay_finite() {
        let w = reweight(&[0.5, 0.5], &[1e6, 0.0], 1.0);
        assert_eq!(w, vec![1.0, 0.0]);
    }
}
