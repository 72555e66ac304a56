//! Unit-root testing: the augmented Dickey-Fuller regression per series,
//! panel-level aggregation of ADF p-values, differencing and the order of
//! integration search.

use serde::{Deserialize, Serialize};

use crate::aggregation::{qppa_fixed, AggregationResult};
use crate::error::{Error, Result};
use crate::float::Float;
use crate::granger::{ErrorPolicy, Panel};
use crate::numstats::{normal_cdf, ols_fit, DesignMatrix};

/// Deterministic terms of the ADF regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionKind {
    /// Intercept only (the default).
    Constant,
    /// Intercept plus linear trend.
    ConstantTrend,
    /// No deterministic terms.
    NoDeterministic,
}

impl RegressionKind {
    fn deterministic_terms(self) -> usize {
        match self {
            RegressionKind::Constant => 1,
            RegressionKind::ConstantTrend => 2,
            RegressionKind::NoDeterministic => 0,
        }
    }
}

/// ADF test output for one series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdfResult<F> {
    /// t-ratio of the lagged-level coefficient.
    pub t_stat: F,
    pub n_lags: usize,
    pub regression_kind: RegressionKind,
    /// Unit-root p-value from the MacKinnon response surface.
    pub p_value: F,
}

/// MacKinnon response-surface coefficients for a single series: clamp bounds,
/// the small-p/large-p switch point and the polynomials (ascending powers)
/// fed to the normal CDF.
struct Surface {
    tau_min: f64,
    tau_max: f64,
    tau_star: f64,
    small_p: [f64; 3],
    large_p: [f64; 4],
}

const SURFACE_NC: Surface = Surface {
    tau_min: -19.04,
    tau_max: f64::INFINITY,
    tau_star: -1.04,
    small_p: [0.6344, 1.2378, 3.2496e-2],
    large_p: [0.4797, 9.3557e-1, -6.999e-2, 3.3066e-2],
};

const SURFACE_C: Surface = Surface {
    tau_min: -18.83,
    tau_max: 2.74,
    tau_star: -1.61,
    small_p: [2.1659, 1.4412, 3.8269e-2],
    large_p: [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2],
};

const SURFACE_CT: Surface = Surface {
    tau_min: -16.18,
    tau_max: 0.7,
    tau_star: -2.89,
    small_p: [3.2512, 1.6047, 4.9588e-2],
    large_p: [2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2],
};

fn polyval_ascending<F: Float>(coeffs: &[f64], x: F) -> F {
    let mut acc = F::zero();
    for &c in coeffs.iter().rev() {
        acc = acc * x + F::cast(c);
    }
    acc
}

/// MacKinnon (1994) approximate asymptotic p-value for the ADF t statistic.
pub fn mackinnon_p_value<F: Float>(t_stat: F, kind: RegressionKind) -> F {
    let surface = match kind {
        RegressionKind::Constant => &SURFACE_C,
        RegressionKind::ConstantTrend => &SURFACE_CT,
        RegressionKind::NoDeterministic => &SURFACE_NC,
    };
    if t_stat > F::cast(surface.tau_max) {
        return F::one();
    }
    if t_stat < F::cast(surface.tau_min) {
        return F::zero();
    }
    let arg = if t_stat <= F::cast(surface.tau_star) {
        polyval_ascending(&surface.small_p, t_stat)
    } else {
        polyval_ascending(&surface.large_p, t_stat)
    };
    normal_cdf(arg)
}

/// Augmented Dickey-Fuller regression: the first difference on the lagged
/// level, `n_lags` lagged differences and the deterministic terms. The null
/// is a unit root; more negative t means stronger rejection.
pub fn adf_test<F: Float>(
    series: &[F],
    n_lags: usize,
    regression_kind: RegressionKind,
) -> Result<AdfResult<F>> {
    let n = series.len();
    let k = 1 + n_lags + regression_kind.deterministic_terms();
    let needed = n_lags + 4 + k;
    if n < needed {
        return Err(Error::InsufficientData {
            needed,
            have: n,
            detail: format!("adf with {n_lags} lags and {k} regressors"),
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("series contains non-finite values"));
    }
    let first = series[0];
    if series.iter().all(|&v| v == first) {
        return Err(Error::DegenerateSeries {
            detail: "constant series has no unit root to test".into(),
        });
    }

    let n_obs = n - 1 - n_lags;
    let mut rows = Vec::with_capacity(n_obs);
    let mut resp = Vec::with_capacity(n_obs);
    for (row_idx, tau) in ((n_lags + 1)..n).enumerate() {
        let mut row = Vec::with_capacity(k);
        row.push(series[tau - 1]);
        for j in 1..=n_lags {
            row.push(series[tau - j] - series[tau - j - 1]);
        }
        match regression_kind {
            RegressionKind::Constant => row.push(F::one()),
            RegressionKind::ConstantTrend => {
                row.push(F::one());
                row.push(F::from_count(row_idx + 1));
            }
            RegressionKind::NoDeterministic => {}
        }
        rows.push(row);
        resp.push(series[tau] - series[tau - 1]);
    }

    let fit = ols_fit(&DesignMatrix::from_rows(&rows)?, &resp)?;

    let mean = resp.iter().copied().sum::<F>() / F::from_count(n_obs);
    let tss = resp.iter().map(|&v| (v - mean) * (v - mean)).sum::<F>();
    let scale = tss.max(resp.iter().map(|&v| v * v).sum::<F>());
    if fit.rss <= scale * F::cast(1e-12) {
        return Err(Error::DegenerateSeries {
            detail: "adf regression has numerically zero residual variance".into(),
        });
    }
    let se = fit.standard_error(0);
    if se <= F::zero() || !se.is_finite() {
        return Err(Error::DegenerateSeries {
            detail: "lagged-level coefficient has no standard error".into(),
        });
    }
    let t_stat = fit.coefficients[0] / se;
    Ok(AdfResult {
        t_stat,
        n_lags,
        regression_kind,
        p_value: mackinnon_p_value(t_stat, regression_kind),
    })
}

/// Panel-level unit-root test output.
#[derive(Debug, Clone)]
pub struct PanelAdfResult<F> {
    /// Quantile aggregation of the member p-values; the null is that the
    /// panel has a unit root.
    pub aggregate: AggregationResult<F>,
    /// Per-member results in input order (skipped members omitted).
    pub per_member: Vec<AdfResult<F>>,
    /// (index, message) of members skipped under the lenient policy.
    pub skipped: Vec<(usize, String)>,
}

/// Applies [`adf_test`] to every series and aggregates the p-values with the
/// fixed-gamma quantile rule.
pub fn panel_adf<F: Float>(
    series_panel: &[Vec<F>],
    n_lags: usize,
    regression_kind: RegressionKind,
    gamma: F,
    policy: ErrorPolicy,
) -> Result<PanelAdfResult<F>> {
    if series_panel.is_empty() {
        return Err(Error::domain("panel must contain at least one series"));
    }
    let mut per_member = Vec::with_capacity(series_panel.len());
    let mut skipped = Vec::new();
    for (i, series) in series_panel.iter().enumerate() {
        match adf_test(series, n_lags, regression_kind) {
            Ok(r) => per_member.push(r),
            Err(e) => match policy {
                ErrorPolicy::Strict => return Err(e.for_member(&format!("series {i}"))),
                ErrorPolicy::Lenient => skipped.push((i, e.to_string())),
            },
        }
    }
    if per_member.is_empty() {
        return Err(Error::EmptyPanel);
    }
    let p_values: Vec<F> = per_member.iter().map(|r| r.p_value).collect();
    Ok(PanelAdfResult {
        aggregate: qppa_fixed(&p_values, gamma)?,
        per_member,
        skipped,
    })
}

/// `d`-fold first difference; the output has `len - d` values.
pub fn difference<F: Float>(series: &[F], d: usize) -> Result<Vec<F>> {
    if series.len() <= d {
        return Err(Error::InsufficientData {
            needed: d + 1,
            have: series.len(),
            detail: "differencing consumes one observation per order".into(),
        });
    }
    let mut out = series.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    Ok(out)
}

/// Result of the order-of-integration search.
#[derive(Debug, Clone)]
pub struct IntegrationReport<F> {
    /// Smallest d whose both aggregated p-values reject the unit-root null.
    pub order: usize,
    /// (d, aggregated p for the x panel, aggregated p for the y panel) for
    /// every order visited.
    pub per_order_pvalues: Vec<(usize, F, F)>,
    pub gamma: F,
}

/// Searches d = 0, 1, ... for the first order where the panel unit-root null
/// is rejected for both variables, testing the d-times differenced series.
/// The member error policy is forwarded to the per-order panel tests.
pub fn integration_order_search<F: Float>(
    panel: &Panel<F>,
    n_lags: usize,
    regression_kind: RegressionKind,
    gamma: F,
    alpha: F,
    max_order: usize,
    policy: ErrorPolicy,
) -> Result<IntegrationReport<F>> {
    if !(alpha > F::zero() && alpha < F::one()) {
        return Err(Error::domain("alpha must lie in (0, 1)"));
    }
    let mut per_order_pvalues = Vec::new();
    for d in 0..=max_order {
        let xs: Result<Vec<Vec<F>>> = panel
            .members()
            .iter()
            .map(|m| difference(m.x(), d))
            .collect();
        let ys: Result<Vec<Vec<F>>> = panel
            .members()
            .iter()
            .map(|m| difference(m.y(), d))
            .collect();
        let p_x = panel_adf(&xs?, n_lags, regression_kind, gamma, policy)?
            .aggregate
            .p_value;
        let p_y = panel_adf(&ys?, n_lags, regression_kind, gamma, policy)?
            .aggregate
            .p_value;
        per_order_pvalues.push((d, p_x, p_y));
        if p_x <= alpha && p_y <= alpha {
            return Ok(IntegrationReport {
                order: d,
                per_order_pvalues,
                gamma,
            });
        }
    }
    Err(Error::OrderNotFound { max_order })
}
