//! Small dense solves backed by nalgebra.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Solves `a x = b` for symmetric positive semi-definite `a`.
///
/// Uses a Cholesky factorization and falls back to an SVD least-squares
/// solve when `a` is singular.
pub fn solve_spd(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let am = DMatrix::from_fn(n, n, |i, j| a[[i, j]]);
    let bv = DVector::from_iterator(n, b.iter().copied());
    let x = match am.clone().cholesky() {
        Some(ch) => ch.solve(&bv),
        None => {
            let scale = am.amax().max(1.0);
            am.svd(true, true)
                .solve(&bv, scale * 1e-12)
                .map_err(|e| Error::Numerical(e.to_string()))?
        }
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("linear solve produced non-finite values".into()));
    }
    Ok(Array1::from_iter(x.iter().copied()))
}
