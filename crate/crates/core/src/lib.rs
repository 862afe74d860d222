//! Distributionally robust feature selection.
//!
//! Every feature gets a Gaussian noise variance `alpha_i`. The noisy view of a
//! row is `S = X + sqrt(alpha) * eps`. The selector minimizes, over the worst
//! population, the negated second moment of the kernel-smoothed conditional
//! mean `E[mu(X) | S]`, plus a sparsity penalty. This equals minimizing the
//! Bayes-optimal squared error up to terms that do not depend on `alpha`.
//! Features that survive with the smallest noise are the ones selected.
//!
//! Pipeline building blocks:
//!
//! * [`data`]: multi-population datasets, CSV ingestion, standardization,
//!   splitting, and the synthetic benchmark generators.
//! * [`mu_model`]: per-population conditional mean estimators, fit once.
//! * [`objective`]: kernel weights, Monte Carlo population losses, worst-case
//!   aggregation, regularizer, and the exact gradient in `alpha`.
//! * [`optimizer`]: Adam with cosine annealing over `alpha`, and the final
//!   top-k rule.
//! * [`baselines`]: pooled Lasso, DRO-Lasso, random subsets.
//! * [`evaluation`]: downstream per-population models and comparison tables.
//! * [`pipeline`]: split, fit, optimize, and select for one seed.

pub mod baselines;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod mu_model;
pub mod objective;
pub mod optimizer;
pub mod pipeline;
pub mod rng;

pub use error::{Error, Result};
