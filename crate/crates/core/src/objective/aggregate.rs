use serde::{Deserialize, Serialize};

/// How per-population losses combine into one objective.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Worst population; ties go to the lowest index.
    #[default]
    Hardmax,
    /// `sum_p softmax(beta * L)_p * L_p`: the mean as beta -> 0, the max as beta -> inf.
    Softmax(f64),
}

/// Index of the largest loss, lowest index on ties.
pub fn argmax(losses: &[f64]) -> usize {
    let mut best = 0;
    for (i, &l) in losses.iter().enumerate().skip(1) {
        if l > losses[best] {
            best = i;
        }
    }
    best
}

fn softmax(losses: &[f64], beta: f64) -> Vec<f64> {
    let logits: Vec<f64> = losses.iter().map(|l| beta * l).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn aggregate_losses(losses: &[f64], aggregation: Aggregation) -> f64 {
    assert!(!losses.is_empty(), "at least one population loss is required");
    match aggregation {
        Aggregation::Hardmax => losses[argmax(losses)],
        Aggregation::Softmax(beta) => softmax(losses, beta)
            .iter()
            .zip(losses)
            .map(|(s, l)| s * l)
            .sum(),
    }
}

/// Partial derivatives of [`aggregate_losses`] with respect to each loss.
/// For the hard max this is the indicator of the (lowest) argmax.
pub fn aggregation_gradient(losses: &[f64], aggregation: Aggregation) -> Vec<f64> {
    match aggregation {
        Aggregation::Hardmax => {
            let mut g = vec![0.0; losses.len()];
            g[argmax(losses)] = 1.0;
            g
        }
        Aggregation::Softmax(beta) => {
            let s = softmax(losses, beta);
            let agg: f64 = s.iter().zip(losses).map(|(a, b)| a * b).sum();
            s.iter()
                .zip(losses)
                .map(|(sq, lq)| sq * (1.0 + beta * (lq - agg)))
                .collect()
        }
    }
}
