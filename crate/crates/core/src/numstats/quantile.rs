//! Empirical quantiles with the inverse-empirical-CDF convention.

use crate::error::{Error, Result};
use crate::float::Float;

/// Empirical `gamma`-quantile of `values`: the ceil(gamma * m)-th smallest of
/// the m values.
///
/// This inverse-empirical-CDF convention makes the Markov-bound argument
/// behind the quantile aggregation rule hold exactly in finite samples;
/// alternative conventions shift the result by at most one order statistic.
pub fn empirical_quantile<F: Float>(values: &[F], gamma: F) -> Result<F> {
    if values.is_empty() {
        return Err(Error::domain("empirical quantile of an empty set"));
    }
    if !(gamma > F::zero() && gamma < F::one()) {
        return Err(Error::domain("quantile level must lie in (0, 1)"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite value in quantile input"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
    Ok(sorted[order_statistic_index(values.len(), gamma)])
}

/// Zero-based index of the ceil(gamma * m)-th order statistic.
pub(crate) fn order_statistic_index<F: Float>(m: usize, gamma: F) -> usize {
    let k = (gamma * F::from_count(m)).ceil();
    let k = <usize as num_traits::NumCast>::from(k).unwrap_or(1);
    k.clamp(1, m) - 1
}
