//! wasm-bindgen bindings behind `www/index.html`.
//!
//! Three operations are exposed: posterior kernel weights for a point cloud,
//! a short `alpha` optimization on a small synthetic problem, and the
//! softmax aggregation of a set of losses. Everything crosses the boundary as
//! flat `f64` slices or JSON strings.

use drfs::data::{SyntheticDataset, SyntheticSpec};
use drfs::objective::{aggregate_losses, aggregation_gradient, kernel_weights, Aggregation};
use drfs::optimizer::select_features;
use drfs::pipeline::{fit_alpha, prepare_splits, PipelineSettings};
use ndarray::ArrayView2;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Posterior weights of the rows of `points` (row-major, `alpha.len()`
/// columns) given the noisy observation `s`.
#[wasm_bindgen]
pub fn posterior_weights(points: &[f64], s: &[f64], alpha: &[f64]) -> Result<Vec<f64>, JsError> {
    let m = alpha.len();
    if m == 0 || s.len() != m || points.is_empty() || !points.len().is_multiple_of(m) {
        return Err(JsError::new("points must have alpha.len() columns and s must match alpha"));
    }
    if alpha.iter().any(|a| a.is_nan() || *a <= 0.0) {
        return Err(JsError::new("every alpha must be positive"));
    }
    let x = ArrayView2::from_shape((points.len() / m, m), points).map_err(js_err)?;
    Ok(kernel_weights(s, alpha, x))
}

#[derive(Serialize)]
struct Trajectory {
    feature_names: Vec<String>,
    signal: Vec<usize>,
    epochs: Vec<usize>,
    alpha: Vec<Vec<f64>>,
    worst_loss: Vec<f64>,
    ranked: Vec<usize>,
}

/// Optimizes `alpha` on a small instance of the linear benchmark and returns
/// the per-epoch trajectory as JSON.
#[wasm_bindgen]
pub fn alpha_trajectory(n_total: usize, epochs: usize, lambda: f64, seed: u64) -> Result<String, JsError> {
    if !(60..=1500).contains(&n_total) || !(1..=300).contains(&epochs) {
        return Err(JsError::new("n_total must lie in [60, 1500] and epochs in [1, 300]"));
    }
    let ds = SyntheticDataset::Linear;
    let data = SyntheticSpec::new(ds, n_total, ds.min_dim(), seed).generate().map_err(js_err)?;
    let splits = prepare_splits(&data, seed).map_err(js_err)?;
    let mut settings = PipelineSettings::default();
    settings.objective.lambda = lambda;
    settings.objective.mc_samples = 4;
    settings.optimizer.epochs = epochs;
    settings.optimizer.snapshot_every = 1;
    let (alpha, trace) = fit_alpha(&splits, &settings).map_err(js_err)?;

    let mut out = Trajectory {
        feature_names: data.feature_names.clone(),
        signal: ds.signal_features(),
        epochs: vec![0],
        alpha: vec![trace.initial_alpha.clone()],
        worst_loss: vec![f64::NAN],
        ranked: select_features(&alpha, alpha.len()).map_err(js_err)?,
    };
    for rec in &trace.epochs {
        if let Some(a) = &rec.alpha {
            out.epochs.push(rec.epoch);
            out.alpha.push(a.clone());
            out.worst_loss.push(rec.per_population_losses.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
    }
    out.worst_loss[0] = out.worst_loss.get(1).copied().unwrap_or(f64::NAN);
    serde_json::to_string(&out).map_err(js_err)
}

/// `[aggregate, w_1, ..., w_P]`: the softmax aggregate of `losses` at
/// temperature `beta` followed by each population's weight. `beta <= 0`
/// means the hard max.
#[wasm_bindgen]
pub fn aggregate(losses: &[f64], beta: f64) -> Result<Vec<f64>, JsError> {
    if losses.is_empty() || losses.iter().any(|l| !l.is_finite()) {
        return Err(JsError::new("losses must be finite and non-empty"));
    }
    let agg = if beta > 0.0 {
        Aggregation::Softmax(beta)
    } else {
        Aggregation::Hardmax
    };
    let mut out = vec![aggregate_losses(losses, agg)];
    out.extend(aggregation_gradient(losses, agg));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_concentrate_on_nearest_point() {
        let w = posterior_weights(&[0.0, 0.0, 3.0, 3.0], &[0.1, 0.0], &[0.01, 0.01]).unwrap();
        assert!(w[0] > 0.999);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_beta_tracks_the_max() {
        let r = aggregate(&[-0.5, -0.2, -0.9], 1e6).unwrap();
        assert!((r[0] + 0.2).abs() < 1e-9);
        assert!((r[2] - 1.0).abs() < 1e-9);
        let hard = aggregate(&[-0.5, -0.2, -0.9], 0.0).unwrap();
        assert_eq!(hard, vec![-0.2, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn trajectory_has_one_row_per_epoch() {
        let json = alpha_trajectory(150, 5, 1.0, 0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["alpha"].as_array().unwrap().len(), 6);
        assert_eq!(v["ranked"].as_array().unwrap().len(), 15);
    }
}
