use ndarray::ArrayView2;

/// Posterior weights of the rows of `x` given the noisy observation `s`:
/// `w_j ∝ exp(-0.5 (x_j - s)' diag(alpha)^-1 (x_j - s))`, normalized to sum to 1.
///
/// Exponents are shifted by their maximum before exponentiation, so the
/// result is exact even when every raw exponent underflows.
pub fn kernel_weights(s: &[f64], alpha: &[f64], x: ArrayView2<f64>) -> Vec<f64> {
    assert_eq!(s.len(), alpha.len(), "s and alpha lengths differ");
    assert_eq!(x.ncols(), alpha.len(), "x columns and alpha lengths differ");
    assert!(x.nrows() > 0, "kernel weights need at least one row");
    let mut e: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|row| {
            -0.5 * row
                .iter()
                .zip(s)
                .zip(alpha)
                .map(|((xj, sj), a)| (xj - sj) * (xj - sj) / a)
                .sum::<f64>()
        })
        .collect();
    log_softmax_normalize(&mut e);
    e
}

/// In-place softmax of logits; `-inf` entries get weight 0.
pub(crate) fn log_softmax_normalize(e: &mut [f64]) {
    let max = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in e.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in e.iter_mut() {
        *v /= sum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn single_row_has_unit_weight() {
        assert_eq!(kernel_weights(&[0.3, 9.0], &[1.0, 0.01], array![[5.0, -5.0]].view()), vec![1.0]);
    }

    #[test]
    fn one_dimensional_pair() {
        let w = kernel_weights(&[0.0], &[1.0], array![[0.0], [1.0]].view());
        // exponents (0, -1/2): 1/(1+e^-0.5), e^-0.5/(1+e^-0.5)
        assert!((w[0] - 0.62246).abs() < 1e-5);
        assert!((w[1] - 0.37754).abs() < 1e-5);
    }

    #[test]
    fn identical_rows_split_evenly() {
        let w = kernel_weights(&[0.2, 0.1], &[0.5, 2.0], array![[1.0, 1.0], [1.0, 1.0]].view());
        assert_eq!(w, vec![0.5, 0.5]);
    }

    #[test]
    fn survives_exponents_far_below_underflow() {
        // raw exponents around -5e11: naive exp gives 0/0
        let w = kernel_weights(&[0.0], &[1e-6], array![[1000.0], [1000.001]].view());
        assert!(w.iter().all(|v| v.is_finite()));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(w[0], 1.0);
    }
}
