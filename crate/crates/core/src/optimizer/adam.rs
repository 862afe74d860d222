use super::OptimizerConfig;
use crate::error::Result;
use crate::objective::AlphaVector;

/// First and second moment estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub steps: u64,
}

impl AdamState {
    pub fn new(m: usize) -> Self {
        Self {
            first: vec![0.0; m],
            second: vec![0.0; m],
            steps: 0,
        }
    }

    /// Updates the moments with `grad` and returns the bias-corrected step
    /// `-lr * m_hat / (sqrt(v_hat) + eps)`.
    pub fn step(&mut self, grad: &[f64], lr: f64, cfg: &OptimizerConfig) -> Vec<f64> {
        assert_eq!(grad.len(), self.first.len(), "gradient length");
        self.steps += 1;
        let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
        let c1 = 1.0 - b1.powi(self.steps as i32);
        let c2 = 1.0 - b2.powi(self.steps as i32);
        grad.iter()
            .zip(self.first.iter_mut().zip(self.second.iter_mut()))
            .map(|(&g, (m, v))| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                -lr * m_hat / (v_hat.sqrt() + cfg.adam_eps)
            })
            .collect()
    }
}

/// `alpha + delta`, projected to `alpha >= ALPHA_MIN`.
pub fn apply_step(alpha: &AlphaVector, delta: &[f64]) -> Result<AlphaVector> {
    AlphaVector::clamped(alpha.iter().zip(delta).map(|(a, d)| a + d).collect())
}
