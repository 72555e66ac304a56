//! Per-member Granger non-causality tests: lag-embed a pair of series, fit
//! restricted and unrestricted autoregressions, and convert the F statistic
//! into a p-value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::float::Float;
use crate::numstats::{f_cdf, ols_fit, DesignMatrix};

/// Which causal direction to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Does the past of x improve the prediction of y?
    XToY,
    /// Does the past of y improve the prediction of x?
    YToX,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::XToY => Direction::YToX,
            Direction::YToX => Direction::XToY,
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::XToY => write!(f, "x->y"),
            Direction::YToX => write!(f, "y->x"),
        }
    }
}

/// How `granger_panel` handles members whose test fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorPolicy {
    /// Any member failure fails the whole panel operation.
    Strict,
    /// Failing members are skipped and reported alongside the results.
    Lenient,
}

/// One panel member: an aligned (x, y) pair of equal-length series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPair<F> {
    x: Vec<F>,
    y: Vec<F>,
}

impl<F: Float> SeriesPair<F> {
    pub fn new(x: Vec<F>, y: Vec<F>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                detail: format!("x has {} observations, y has {}", x.len(), y.len()),
            });
        }
        if x.is_empty() {
            return Err(Error::domain("series must contain at least one value"));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("series contain non-finite values"));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[F] {
        &self.x
    }

    pub fn y(&self) -> &[F] {
        &self.y
    }

    /// Number of timestamps.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The pair with the roles of x and y exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

/// A panel of members with uniform length and one label per member.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel<F> {
    members: Vec<SeriesPair<F>>,
    labels: Vec<String>,
}

impl<F: Float> Panel<F> {
    pub fn new(members: Vec<SeriesPair<F>>, labels: Vec<String>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::domain("panel must contain at least one member"));
        }
        if labels.len() != members.len() {
            return Err(Error::DimensionMismatch {
                detail: format!("{} members but {} labels", members.len(), labels.len()),
            });
        }
        let t = members[0].len();
        if members.iter().any(|m| m.len() != t) {
            return Err(Error::DimensionMismatch {
                detail: "panel members must share the same length".into(),
            });
        }
        Ok(Self { members, labels })
    }

    /// Panel with generated labels `member_0001`, `member_0002`, ...
    pub fn from_members(members: Vec<SeriesPair<F>>) -> Result<Self> {
        let labels = (1..=members.len())
            .map(|i| format!("member_{i:04}"))
            .collect();
        Self::new(members, labels)
    }

    pub fn n_members(&self) -> usize {
        self.members.len()
    }

    pub fn n_timestamps(&self) -> usize {
        self.members[0].len()
    }

    pub fn members(&self) -> &[SeriesPair<F>] {
        &self.members
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn member(&self, i: usize) -> &SeriesPair<F> {
        &self.members[i]
    }

    /// Sub-panel restricted to the given member indices (in the given order).
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let members = indices.iter().map(|&i| self.members[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        Self::new(members, labels)
    }
}

/// Result of one member's Granger non-causality test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemberTestResult<F> {
    /// F statistic of the nested-model comparison.
    pub f_stat: F,
    /// Numerator degrees of freedom (the lag order).
    pub df_num: usize,
    /// Denominator degrees of freedom.
    pub df_den: usize,
    /// Upper-tail p-value, 1 - F_cdf(f_stat).
    pub p_value: F,
}

/// Relative tolerance below which a residual sum of squares counts as zero.
const DEGENERATE_RSS_FACTOR: f64 = 1e-12;

/// Granger non-causality test for one member.
///
/// The unrestricted model regresses y_t on an intercept, P lags of y and P
/// lags of x; the restricted model drops the x lags. Both models use the same
/// T - P regression rows, so the F comparison is valid. An intercept is always
/// included.
pub fn granger_member_test<F: Float>(
    pair: &SeriesPair<F>,
    lag_order: usize,
) -> Result<MemberTestResult<F>> {
    let p = lag_order;
    if p == 0 {
        return Err(Error::domain("lag order must be at least 1"));
    }
    let t = pair.len();
    // T - P rows must cover 2P + 1 regressors plus at least one residual df.
    let needed = 3 * p + 2;
    if t < needed {
        return Err(Error::InsufficientData {
            needed,
            have: t,
            detail: format!("lag order {p} needs T >= 3P + 2"),
        });
    }

    let x = pair.x();
    let y = pair.y();
    let t_eff = t - p;
    let mut rows_u = Vec::with_capacity(t_eff);
    let mut rows_r = Vec::with_capacity(t_eff);
    let mut response = Vec::with_capacity(t_eff);
    for s in p..t {
        let mut row_u = Vec::with_capacity(2 * p + 1);
        row_u.push(F::one());
        for lag in 1..=p {
            row_u.push(y[s - lag]);
        }
        let row_r = row_u.clone();
        for lag in 1..=p {
            row_u.push(x[s - lag]);
        }
        rows_u.push(row_u);
        rows_r.push(row_r);
        response.push(y[s]);
    }

    let fit_r = ols_fit(&DesignMatrix::from_rows(&rows_r)?, &response)?;
    let fit_u = ols_fit(&DesignMatrix::from_rows(&rows_u)?, &response)?;

    let mean = response.iter().copied().sum::<F>() / F::from_count(t_eff);
    let tss = response
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .sum::<F>();
    if fit_u.rss <= tss * F::cast(DEGENERATE_RSS_FACTOR) {
        return Err(Error::DegenerateSeries {
            detail: "unrestricted residual variance is numerically zero".into(),
        });
    }

    let df_num = p;
    let df_den = t_eff - (2 * p + 1);
    let numerator = (fit_r.rss - fit_u.rss).max(F::zero()) / F::from_count(df_num);
    let denominator = fit_u.rss / F::from_count(df_den);
    let f_stat = numerator / denominator;
    let cdf = f_cdf(f_stat, df_num, df_den)?;
    Ok(MemberTestResult {
        f_stat,
        df_num,
        df_den,
        p_value: F::one() - cdf,
    })
}

/// A member skipped under the lenient error policy.
#[derive(Debug)]
pub struct SkippedMember {
    pub label: String,
    pub error: Error,
}

/// Per-member results of a panel-wide Granger test.
#[derive(Debug)]
pub struct PanelTestOutcome<F> {
    /// Successful member results in panel order.
    pub results: Vec<MemberTestResult<F>>,
    /// Labels aligned with `results`.
    pub labels: Vec<String>,
    /// Members skipped under the lenient policy.
    pub skipped: Vec<SkippedMember>,
}

impl<F: Float> PanelTestOutcome<F> {
    pub fn p_values(&self) -> Vec<F> {
        self.results.iter().map(|r| r.p_value).collect()
    }

    pub fn f_stats(&self) -> Vec<F> {
        self.results.iter().map(|r| r.f_stat).collect()
    }
}

/// Applies [`granger_member_test`] to every member; `direction` selects which
/// series plays the candidate cause. Results are assembled in panel order.
pub fn granger_panel<F: Float>(
    panel: &Panel<F>,
    lag_order: usize,
    direction: Direction,
    policy: ErrorPolicy,
) -> Result<PanelTestOutcome<F>> {
    let mut results = Vec::with_capacity(panel.n_members());
    let mut labels = Vec::with_capacity(panel.n_members());
    let mut skipped = Vec::new();
    for (member, label) in panel.members().iter().zip(panel.labels()) {
        let outcome = match direction {
            Direction::XToY => granger_member_test(member, lag_order),
            Direction::YToX => granger_member_test(&member.swapped(), lag_order),
        };
        match outcome {
            Ok(r) => {
                results.push(r);
                labels.push(label.clone());
            }
            Err(e) => match policy {
                ErrorPolicy::Strict => return Err(e.for_member(label)),
                ErrorPolicy::Lenient => skipped.push(SkippedMember {
                    label: label.clone(),
                    error: e,
                }),
            },
        }
    }
    if results.is_empty() {
        return Err(Error::EmptyPanel);
    }
    Ok(PanelTestOutcome {
        results,
        labels,
        skipped,
    })
}
