//! Calibration diagnostics for p-value samples.

use crate::float::Float;

/// One-sample Kolmogorov-Smirnov statistic against Uniform(0, 1).
pub fn ks_statistic_uniform<F: Float>(samples: &[F]) -> F {
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
    let n = F::from_count(sorted.len());
    let mut d = F::zero();
    for (i, &u) in sorted.iter().enumerate() {
        let hi = F::from_count(i + 1) / n - u;
        let lo = u - F::from_count(i) / n;
        d = d.max(hi).max(lo);
    }
    d
}

/// Asymptotic KS critical value c(alpha) / sqrt(n) for alpha in
/// {0.10, 0.05, 0.01}.
pub fn ks_critical_value<F: Float>(alpha: f64, n: usize) -> F {
    let c = if alpha <= 0.01 {
        1.62762
    } else if alpha <= 0.05 {
        1.35810
    } else {
        1.22385
    };
    F::cast(c) / F::from_count(n).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_sample_passes_and_shifted_sample_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let uniform: Vec<f64> = (0..5000).map(|_| rng.random()).collect();
        let d = ks_statistic_uniform(&uniform);
        assert!(d < ks_critical_value(0.01, 5000));

        let squashed: Vec<f64> = uniform.iter().map(|u| u * u).collect();
        let d = ks_statistic_uniform(&squashed);
        assert!(d > ks_critical_value::<f64>(0.01, 5000));
    }
}
