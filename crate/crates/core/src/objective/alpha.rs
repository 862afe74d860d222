use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible noise variance. `diag(alpha)^-1` needs strictly
/// positive entries; at this level a feature is observed essentially exactly.
pub const ALPHA_MIN: f64 = 1e-6;

/// Per-feature noise variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlphaVector(Vec<f64>);

impl AlphaVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid_arg("alpha must have at least one entry"));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < ALPHA_MIN)
        {
            return Err(Error::invalid_arg(format!(
                "alpha[{i}] = {v} is not a finite value >= {ALPHA_MIN}"
            )));
        }
        Ok(Self(values))
    }

    /// Projects onto `[ALPHA_MIN, inf)`. Non-finite entries are rejected.
    pub fn clamped(mut values: Vec<f64>) -> Result<Self> {
        for v in &mut values {
            if v.is_nan() {
                return Err(Error::Numerical("alpha entry is NaN".into()));
            }
            *v = v.max(ALPHA_MIN);
        }
        Self::new(values)
    }

    pub fn filled(m: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; m])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for AlphaVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}
