//! Dense design matrices and ordinary least squares via Householder QR.

// Indexed loops mirror the textbook factorization and keep the row/column
// roles visible.
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use crate::float::Float;

/// Dense row-major matrix of regressors (n observations x k regressors).
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix<F> {
    n_rows: usize,
    n_cols: usize,
    values: Vec<F>,
}

impl<F: Float> DesignMatrix<F> {
    /// Builds a matrix from observation rows; every row must have the same
    /// length and all entries must be finite.
    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        let n_rows = rows.len();
        if n_rows == 0 {
            return Err(Error::domain("design matrix needs at least one row"));
        }
        let n_cols = rows[0].len();
        if n_cols == 0 {
            return Err(Error::domain("design matrix needs at least one column"));
        }
        let mut values = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    detail: format!("row {i} has {} entries, expected {n_cols}", row.len()),
                });
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::domain(format!("non-finite entry in row {i}")));
                }
                values.push(v);
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, row: usize, col: usize) -> F {
        self.values[row * self.n_cols + col]
    }

    fn max_column_norm(&self) -> F {
        let mut max = F::zero();
        for j in 0..self.n_cols {
            let mut s = F::zero();
            for i in 0..self.n_rows {
                let v = self.get(i, j);
                s = s + v * v;
            }
            max = max.max(s.sqrt());
        }
        max
    }
}

/// Output of [`ols_fit`].
#[derive(Debug, Clone)]
pub struct OlsFit<F> {
    /// Estimated coefficients, one per design column.
    pub coefficients: Vec<F>,
    /// Residual sum of squares.
    pub rss: F,
    /// Residual degrees of freedom, n - k.
    pub df_resid: usize,
    /// Diagonal of (X'X)^-1, used for coefficient standard errors.
    pub xtx_inv_diag: Vec<F>,
}

impl<F: Float> OlsFit<F> {
    /// Residual variance estimate rss / df.
    pub fn sigma2(&self) -> F {
        self.rss / F::from_count(self.df_resid)
    }

    /// OLS standard error of coefficient `j`.
    pub fn standard_error(&self, j: usize) -> F {
        (self.sigma2() * self.xtx_inv_diag[j]).sqrt()
    }
}

/// Least-squares fit of `response` on `design` by Householder QR.
///
/// QR is used instead of the normal equations because the lag matrices built
/// from near-unit-root series are ill-conditioned. The rank tolerance is
/// `n * eps * max_column_norm`.
pub fn ols_fit<F: Float>(design: &DesignMatrix<F>, response: &[F]) -> Result<OlsFit<F>> {
    let n = design.n_rows();
    let k = design.n_cols();
    if response.len() != n {
        return Err(Error::DimensionMismatch {
            detail: format!("response has {} entries, design has {n} rows", response.len()),
        });
    }
    if response.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite entry in response"));
    }
    if k > n {
        return Err(Error::InsufficientData {
            needed: k,
            have: n,
            detail: "more regressors than observations".into(),
        });
    }

    // Working copies: `a` is reduced to R in place, `q_t_y` accumulates Q'y.
    let mut a = design.values.clone();
    let mut q_t_y = response.to_vec();
    let at = |a: &[F], i: usize, j: usize| a[i * k + j];

    for j in 0..k {
        // Householder vector for column j, rows j..n.
        let mut norm = F::zero();
        for i in j..n {
            let v = at(&a, i, j);
            norm = norm + v * v;
        }
        let norm = norm.sqrt();
        if norm > F::zero() {
            let pivot = at(&a, j, j);
            let alpha = if pivot >= F::zero() { -norm } else { norm };
            // v = x - alpha e1, normalized so v[0] = 1 implicitly via beta.
            let v0 = pivot - alpha;
            let mut v = vec![F::zero(); n - j];
            v[0] = v0;
            for i in (j + 1)..n {
                v[i - j] = at(&a, i, j);
            }
            let vtv = v.iter().map(|&x| x * x).sum::<F>();
            if vtv > F::zero() {
                let two = F::cast(2.0);
                // Apply H = I - 2 v v'/v'v to the remaining columns and Q'y.
                for col in j..k {
                    let mut dot = F::zero();
                    for i in j..n {
                        dot = dot + v[i - j] * at(&a, i, col);
                    }
                    let scale = two * dot / vtv;
                    for i in j..n {
                        a[i * k + col] = at(&a, i, col) - scale * v[i - j];
                    }
                }
                let mut dot = F::zero();
                for i in j..n {
                    dot = dot + v[i - j] * q_t_y[i];
                }
                let scale = two * dot / vtv;
                for i in j..n {
                    q_t_y[i] = q_t_y[i] - scale * v[i - j];
                }
            }
        }
    }

    let tol = F::from_count(n) * F::epsilon() * design.max_column_norm();
    for j in 0..k {
        if at(&a, j, j).abs() <= tol {
            return Err(Error::RankDeficient {
                detail: format!("R[{j}][{j}] below tolerance {tol}"),
            });
        }
    }

    // Back-substitution: R beta = (Q'y)[0..k].
    let mut coefficients = vec![F::zero(); k];
    for j in (0..k).rev() {
        let mut s = q_t_y[j];
        for m in (j + 1)..k {
            s = s - at(&a, j, m) * coefficients[m];
        }
        coefficients[j] = s / at(&a, j, j);
    }

    // Residuals against the original design keep the orthogonality property
    // tight even when Q'y has accumulated rounding.
    let mut rss = F::zero();
    for i in 0..n {
        let mut fitted = F::zero();
        for j in 0..k {
            fitted = fitted + design.get(i, j) * coefficients[j];
        }
        let r = response[i] - fitted;
        rss = rss + r * r;
    }

    // (X'X)^-1 = R^-1 R^-T; row sums of squares of R^-1 give the diagonal.
    let mut r_inv = vec![F::zero(); k * k];
    for col in 0..k {
        // Solve R z = e_col.
        for j in (0..=col).rev() {
            let mut s = if j == col { F::one() } else { F::zero() };
            for m in (j + 1)..=col {
                s = s - at(&a, j, m) * r_inv[m * k + col];
            }
            r_inv[j * k + col] = s / at(&a, j, j);
        }
    }
    let mut xtx_inv_diag = vec![F::zero(); k];
    for j in 0..k {
        let mut s = F::zero();
        for m in j..k {
            let v = r_inv[j * k + m];
            s = s + v * v;
        }
        xtx_inv_diag[j] = s;
    }

    Ok(OlsFit {
        coefficients,
        rss,
        df_resid: n - k,
        xtx_inv_diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(rows: &[&[f64]]) -> DesignMatrix<f64> {
        DesignMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn intercept_only_fits_mean() {
        let x = design(&[&[1.0], &[1.0], &[1.0]]);
        let fit = ols_fit(&x, &[1.0, 2.0, 3.0]).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-12);
        assert!((fit.rss - 2.0).abs() < 1e-12);
        assert_eq!(fit.df_resid, 2);
    }

    #[test]
    fn exact_fit_recovers_coefficients() {
        let x = design(&[&[1.0, 2.0], &[2.0, -1.0], &[0.5, 3.0], &[4.0, 1.0]]);
        let beta = [1.5, -0.5];
        let y: Vec<f64> = (0..4)
            .map(|i| x.get(i, 0) * beta[0] + x.get(i, 1) * beta[1])
            .collect();
        let fit = ols_fit(&x, &y).unwrap();
        assert!(fit.rss.abs() < 1e-20);
        assert!((fit.coefficients[0] - 1.5).abs() < 1e-12);
        assert!((fit.coefficients[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_design_is_reported() {
        // Second column is twice the first.
        let x = design(&[&[1.0, 2.0], &[2.0, 4.0], &[3.0, 6.0], &[4.0, 8.0]]);
        match ols_fit(&x, &[1.0, 2.0, 3.0, 4.0]) {
            Err(Error::RankDeficient { .. }) => {}
            other => panic!("expected RankDeficient, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let x = design(&[&[1.0], &[1.0]]);
        match ols_fit(&x, &[1.0, 2.0, 3.0]) {
            Err(Error::DimensionMismatch { .. }) => {}
            other => panic!("expected DimensionMismatch, got {other:?}"),
        }
    }

    #[test]
    fn standard_errors_match_simple_regression_formula() {
        // y on [1, t]: closed-form se for the slope.
        let t: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let y = [2.0, 2.9, 4.2, 4.8, 6.1, 7.2, 7.8, 9.1];
        let rows: Vec<Vec<f64>> = t.iter().map(|&ti| vec![1.0, ti]).collect();
        let x = DesignMatrix::from_rows(&rows).unwrap();
        let fit = ols_fit(&x, &y).unwrap();

        let t_bar = t.iter().sum::<f64>() / 8.0;
        let sxx: f64 = t.iter().map(|&ti| (ti - t_bar).powi(2)).sum();
        let expected_se = (fit.sigma2() / sxx).sqrt();
        assert!((fit.standard_error(1) - expected_se).abs() < 1e-12);
    }
}
