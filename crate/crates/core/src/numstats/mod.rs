//! Numeric kernels shared by the statistical modules: least squares, the
//! F-distribution CDF, the standard normal CDF and empirical quantiles.
//!
//! All operations are pure functions of their inputs and safe to call from
//! any number of threads.

mod matrix;
pub(crate) mod quantile;
mod special;

pub use matrix::{ols_fit, DesignMatrix, OlsFit};
pub use quantile::empirical_quantile;
pub use special::{f_cdf, ln_gamma, normal_cdf, regularized_incomplete_beta};
