//! Monte Carlo estimate of one population's loss
//! `-(1/b) sum_l mean_i ( sum_j w_ij(S_il, alpha) mu_j )^2` and its gradient.
//!
//! Each replicate noises every row: `S_i = X_i + sqrt(alpha) * eps_i`. The
//! logits `-0.5 ||X_j - S_i||^2_{1/alpha}` are formed, up to a per-row
//! constant that softmax ignores, as `S diag(1/alpha) X' - 0.5 ||X_j||^2_{1/alpha}`.
//! That is one GEMM per replicate. The gradient needs two more,
//! `C X` and `C X^2` with `C_ij = w_ij (mu_j - m_i)`.
//!
//! With `d_ijd = X_jd - S_id`:
//!
//! ```text
//! d e_ij / d alpha_d = d_ijd eps_id / (2 alpha_d^1.5) + d_ijd^2 / (2 alpha_d^2)
//! d m_i  / d alpha_d = sum_j C_ij d e_ij / d alpha_d
//! ```
//!
//! The first term is the path through the sampled `S`; the second is the
//! explicit bandwidth dependence of the kernel.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand_distr::{Distribution, StandardNormal};

use crate::rng::noise_stream;

pub(crate) struct PopulationTerm {
    pub loss: f64,
    pub grad: Option<Vec<f64>>,
}

pub(crate) struct PopulationInput<'a> {
    pub id: &'a str,
    pub x: ArrayView2<'a, f64>,
    pub mu: ArrayView1<'a, f64>,
}

pub(crate) struct NoiseKey {
    pub seed: u64,
    pub epoch: u64,
    pub replicates: usize,
}

/// Standard normal draws for one replicate, row-major `n x m`.
pub fn replicate_noise(seed: u64, epoch: u64, id: &str, replicate: u64, n: usize, m: usize) -> Array2<f64> {
    let mut rng = noise_stream(seed, epoch, id, replicate);
    Array2::from_shape_simple_fn((n, m), || StandardNormal.sample(&mut rng))
}

/// Masks every logit outside the `k` nearest rows (plain Euclidean between
/// `S_i` and `X_j`) to `-inf`. Ties go to the lower row index.
fn mask_to_neighbors(logits: &mut Array2<f64>, s: &Array2<f64>, x: ArrayView2<f64>, row_sq: &Array1<f64>, k: usize) {
    // ||X_j - S_i||^2 = ||X_j||^2 - 2 S_i.X_j + const(i)
    let cross = s.dot(&x.t());
    let n = x.nrows();
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut keep = vec![false; n];
    for (mut lrow, crow) in logits.rows_mut().into_iter().zip(cross.rows()) {
        order.clear();
        order.extend(crow.iter().zip(row_sq.iter()).enumerate().map(|(j, (c, r))| (r - 2.0 * c, j)));
        order.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        keep.iter_mut().for_each(|v| *v = false);
        for &(_, j) in &order[..k] {
            keep[j] = true;
        }
        for (v, &kj) in lrow.iter_mut().zip(&keep) {
            if !kj {
                *v = f64::NEG_INFINITY;
            }
        }
    }
}

pub(crate) fn population_term(
    alpha: &[f64],
    pop: &PopulationInput<'_>,
    neighbors: usize,
    key: &NoiseKey,
    want_grad: bool,
) -> PopulationTerm {
    let x = pop.x;
    let (n, m) = x.dim();
    debug_assert!(neighbors >= 1 && neighbors <= n);
    debug_assert_eq!(alpha.len(), m);
    let alpha = Array1::from(alpha.to_vec());
    let inv_alpha = alpha.mapv(|a| 1.0 / a);
    let sqrt_alpha = alpha.mapv(f64::sqrt);
    let x_sq = x.mapv(|v| v * v);
    let half_norm = x_sq.dot(&inv_alpha) * 0.5;
    let row_sq = if neighbors < n { x_sq.sum_axis(Axis(1)) } else { Array1::zeros(0) };

    let mut sum_sq = 0.0;
    let mut grad = if want_grad { vec![0.0; m] } else { Vec::new() };
    let mut smoothed = Array1::<f64>::zeros(n);
    let mut csum = Array1::<f64>::zeros(n);

    for l in 0..key.replicates {
        let eps = replicate_noise(key.seed, key.epoch, pop.id, l as u64, n, m);
        let s = &x + &(&eps * &sqrt_alpha);
        let s_scaled = &s * &inv_alpha;
        let mut w = s_scaled.dot(&x.t());
        if neighbors < n {
            mask_to_neighbors(&mut w, &s, x, &row_sq, neighbors);
        }

        for (i, mut row) in w.rows_mut().into_iter().enumerate() {
            let mut max = f64::NEG_INFINITY;
            Zip::from(&mut row).and(&half_norm).for_each(|v, h| {
                *v -= h;
                if *v > max {
                    max = *v;
                }
            });
            let mut total = 0.0;
            row.iter_mut().for_each(|v| {
                *v = (*v - max).exp();
                total += *v;
            });
            let inv_total = 1.0 / total;
            let mut mi = 0.0;
            Zip::from(&mut row).and(&pop.mu).for_each(|v, mu| {
                *v *= inv_total;
                mi += *v * mu;
            });
            smoothed[i] = mi;
        }
        sum_sq += smoothed.iter().map(|v| v * v).sum::<f64>();

        if want_grad {
            // w <- C = w_ij (mu_j - m_i)
            for (i, mut row) in w.rows_mut().into_iter().enumerate() {
                let mi = smoothed[i];
                let mut c = 0.0;
                Zip::from(&mut row).and(&pop.mu).for_each(|v, mu| {
                    *v *= mu - mi;
                    c += *v;
                });
                csum[i] = c;
            }
            let cx = w.dot(&x);
            let cx2 = w.dot(&x_sq);
            for i in 0..n {
                let two_mi = 2.0 * smoothed[i];
                if two_mi == 0.0 {
                    continue;
                }
                let ci = csum[i];
                for d in 0..m {
                    let sd = s[[i, d]];
                    let a = cx[[i, d]];
                    let lin = a - sd * ci;
                    let quad = cx2[[i, d]] - 2.0 * sd * a + sd * sd * ci;
                    let ad = alpha[d];
                    let dm = eps[[i, d]] * lin / (2.0 * ad * sqrt_alpha[d]) + quad / (2.0 * ad * ad);
                    grad[d] += two_mi * dm;
                }
            }
        }
    }

    let scale = 1.0 / (key.replicates as f64 * n as f64);
    PopulationTerm {
        loss: -sum_sq * scale,
        grad: want_grad.then(|| grad.into_iter().map(|g| -g * scale).collect()),
    }
}
