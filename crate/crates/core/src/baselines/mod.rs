//! Comparison selectors: pooled Lasso, its group-reweighted variant, and a
//! uniformly random subset.

mod dro;
mod lasso;

pub use dro::{dro_lasso, reweight, DroLassoConfig, DroLassoResult};
pub use lasso::{lasso_fit, lasso_rank, LassoConfig, LassoModel};

use rand::seq::index;

use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// A uniform `k`-subset of `0..m`, sorted ascending.
pub fn random_select(m: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k == 0 || k > m {
        return Err(Error::invalid_arg(format!("budget k = {k} must lie in [1, {m}]")));
    }
    let mut rng = rng::stream(Domain::RandomSelect, &[seed, m as u64, k as u64]);
    let mut out = index::sample(&mut rng, m, k).into_vec();
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_budget_is_everything() {
        assert_eq!(random_select(6, 6, 3).unwrap(), (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn seeded_and_distinct() {
        let a = random_select(50, 8, 11).unwrap();
        assert_eq!(a, random_select(50, 8, 11).unwrap());
        let mut d = a.clone();
        d.dedup();
        assert_eq!(d.len(), 8);
        assert!(a.iter().all(|&i| i < 50));
    }

    #[test]
    fn out_of_range_budget() {
        assert!(random_select(3, 0, 1).is_err());
        assert!(random_select(3, 4, 1).is_err());
    }

    #[test]
    fn single_pick_from_two_is_fair() {
        let n = 10_000;
        let zeros = (0..n).filter(|&s| random_select(2, 1, s).unwrap()[0] == 0).count();
        let frac = zeros as f64 / n as f64;
        assert!((frac - 0.5).abs() <= 0.02, "{frac}");
    }
}
