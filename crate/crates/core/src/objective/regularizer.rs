use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerKind {
    /// `1 / ||alpha||_1`; small total noise is penalized, which pushes
    /// uninformative features toward large variances.
    #[default]
    ReciprocalL1,
    None,
}

/// Regularizer value and its gradient in `alpha` (entries assumed positive).
pub fn regularizer(alpha: &[f64], kind: RegularizerKind) -> (f64, Vec<f64>) {
    match kind {
        RegularizerKind::None => (0.0, vec![0.0; alpha.len()]),
        RegularizerKind::ReciprocalL1 => {
            let total: f64 = alpha.iter().sum();
            let g = -1.0 / (total * total);
            (1.0 / total, vec![g; alpha.len()])
        }
    }
}
