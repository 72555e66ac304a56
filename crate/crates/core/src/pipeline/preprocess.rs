//! Preprocessing for real panels: window slicing, standardization, order of
//! integration search, differencing and removal of constant members.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::float::Float;
use crate::granger::{Panel, SeriesPair};
use crate::stationarity::{difference, integration_order_search, RegressionKind};

/// Options for [`preprocess`].
#[derive(Debug, Clone)]
pub struct PreprocessOptions {
    /// Inclusive (start, end) timestamp names; `None` keeps the full range.
    pub window: Option<(String, String)>,
    pub adf_lags: usize,
    pub regression_kind: RegressionKind,
    /// Quantile level of the panel unit-root aggregation.
    pub gamma: f64,
    pub alpha: f64,
    pub max_order: usize,
    /// Members dropped during ingestion, echoed into the report.
    pub dropped_missing: Vec<String>,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self {
            window: None,
            adf_lags: 12,
            regression_kind: RegressionKind::Constant,
            gamma: 0.5,
            alpha: 0.05,
            max_order: 5,
            dropped_missing: Vec::new(),
        }
    }
}

/// What preprocessing did to the panel.
#[derive(Debug, Clone, Serialize)]
pub struct PreprocessReport {
    pub members_dropped_missing: Vec<String>,
    pub members_dropped_constant: Vec<String>,
    /// First and last timestamp of the analysis window.
    pub window: (String, String),
    /// Differencing order applied to every member.
    pub integration_order: usize,
    /// (d, aggregated p for x, aggregated p for y) for each order visited.
    pub per_order_pvalues: Vec<(usize, f64, f64)>,
    pub final_members: usize,
    pub final_timestamps: usize,
}

fn standardize<F: Float>(series: &[F]) -> Vec<F> {
    let n = F::from_count(series.len());
    let mean = series.iter().copied().sum::<F>() / n;
    let var = series
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .sum::<F>()
        / (n - F::one()).max(F::one());
    let sd = var.sqrt();
    if sd > F::zero() {
        series.iter().map(|&v| (v - mean) / sd).collect()
    } else {
        // Constant series stay constant and are dropped later.
        series.iter().map(|&v| v - mean).collect()
    }
}

fn is_constant<F: Float>(series: &[F]) -> bool {
    let first = series[0];
    let scale = series
        .iter()
        .fold(F::zero(), |acc, &v| acc.max(v.abs()))
        .max(F::one());
    series
        .iter()
        .all(|&v| (v - first).abs() <= scale * F::cast(1e-12))
}

/// Applies the real-data pipeline: slice to the window, standardize each
/// series, find the order of integration on the panel, difference every
/// member that many times and drop members that became constant.
pub fn preprocess<F: Float>(
    panel: &Panel<F>,
    timestamps: &[String],
    options: &PreprocessOptions,
) -> Result<(Panel<F>, PreprocessReport)> {
    if timestamps.len() != panel.n_timestamps() {
        return Err(Error::DimensionMismatch {
            detail: format!(
                "{} timestamp names for {} observations",
                timestamps.len(),
                panel.n_timestamps()
            ),
        });
    }

    // Window slice.
    let (start_idx, end_idx) = match &options.window {
        None => (0, timestamps.len() - 1),
        Some((start, end)) => {
            let s = timestamps.iter().position(|t| t == start).ok_or_else(|| {
                Error::domain(format!("window start '{start}' not in timestamps"))
            })?;
            let e = timestamps.iter().position(|t| t == end).ok_or_else(|| {
                Error::domain(format!("window end '{end}' not in timestamps"))
            })?;
            if s > e {
                return Err(Error::domain("window start is after window end"));
            }
            (s, e)
        }
    };
    let window = (timestamps[start_idx].clone(), timestamps[end_idx].clone());

    // Standardize inside the window.
    let mut members = Vec::with_capacity(panel.n_members());
    for member in panel.members() {
        let x = standardize(&member.x()[start_idx..=end_idx]);
        let y = standardize(&member.y()[start_idx..=end_idx]);
        members.push(SeriesPair::new(x, y)?);
    }
    let standardized = Panel::new(members, panel.labels().to_vec())?;

    // Order of integration on the standardized panel; members whose ADF
    // regression fails are skipped here and handled by the constant-member
    // drop below.
    let report = integration_order_search(
        &standardized,
        options.adf_lags,
        options.regression_kind,
        F::cast(options.gamma),
        F::cast(options.alpha),
        options.max_order,
        crate::granger::ErrorPolicy::Lenient,
    )?;
    let d = report.order;

    // Difference and drop members that became constant.
    let mut kept = Vec::new();
    let mut kept_labels = Vec::new();
    let mut dropped_constant = Vec::new();
    for (member, label) in standardized.members().iter().zip(standardized.labels()) {
        let x = difference(member.x(), d)?;
        let y = difference(member.y(), d)?;
        if is_constant(&x) || is_constant(&y) {
            dropped_constant.push(label.clone());
            continue;
        }
        kept.push(SeriesPair::new(x, y)?);
        kept_labels.push(label.clone());
    }
    if kept.is_empty() {
        return Err(Error::EmptyPanel);
    }
    let out = Panel::new(kept, kept_labels)?;
    let final_members = out.n_members();
    let final_timestamps = out.n_timestamps();
    Ok((
        out,
        PreprocessReport {
            members_dropped_missing: options.dropped_missing.clone(),
            members_dropped_constant: dropped_constant,
            window,
            integration_order: d,
            per_order_pvalues: report
                .per_order_pvalues
                .iter()
                .map(|&(d, px, py)| {
                    (
                        d,
                        num_traits::ToPrimitive::to_f64(&px).unwrap_or(f64::NAN),
                        num_traits::ToPrimitive::to_f64(&py).unwrap_or(f64::NAN),
                    )
                })
                .collect(),
            final_members,
            final_timestamps,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn noise_pair(t: usize, seed: u64) -> SeriesPair<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..t).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let y: Vec<f64> = (0..t).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        SeriesPair::new(x, y).unwrap()
    }

    fn stamps(t: usize) -> Vec<String> {
        (0..t).map(|i| format!("t{i}")).collect()
    }

    #[test]
    fn stationary_panel_gets_order_zero_and_no_drops() {
        let members: Vec<SeriesPair<f64>> = (0..6).map(|i| noise_pair(150, i)).collect();
        let panel = Panel::from_members(members).unwrap();
        let opts = PreprocessOptions {
            adf_lags: 1,
            ..PreprocessOptions::default()
        };
        let (out, report) = preprocess(&panel, &stamps(150), &opts).unwrap();
        assert_eq!(report.integration_order, 0);
        assert!(report.members_dropped_constant.is_empty());
        assert_eq!(out.n_members(), 6);
        assert_eq!(report.final_timestamps, 150);
        // Standardization: mean 0, sd 1.
        let x = out.member(0).x();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        assert!(mean.abs() < 1e-10);
    }

    #[test]
    fn constant_after_differencing_is_dropped() {
        let good = noise_pair(120, 9);
        // y is a perfect linear trend: standardized it stays a trend, and
        // after d=1 differencing it is constant.
        let x_rw: Vec<f64> = {
            let mut acc = 0.0;
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            (0..120)
                .map(|_| {
                    acc += rng.sample::<f64, _>(StandardNormal);
                    acc
                })
                .collect()
        };
        let y_trend: Vec<f64> = (0..120).map(|i| i as f64).collect();
        let trending = SeriesPair::new(x_rw, y_trend).unwrap();

        // Random-walk members force d >= 1.
        let mut members: Vec<SeriesPair<f64>> = (0..5)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(100 + i);
                let mut ax = 0.0;
                let mut ay = 0.0;
                let x: Vec<f64> = (0..120)
                    .map(|_| {
                        ax += rng.sample::<f64, _>(StandardNormal);
                        ax
                    })
                    .collect();
                let y: Vec<f64> = (0..120)
                    .map(|_| {
                        ay += rng.sample::<f64, _>(StandardNormal);
                        ay
                    })
                    .collect();
                SeriesPair::new(x, y).unwrap()
            })
            .collect();
        members.push(good);
        members.push(trending);
        let labels: Vec<String> = (0..members.len()).map(|i| format!("m{i}")).collect();
        let panel = Panel::new(members, labels).unwrap();
        let opts = PreprocessOptions {
            adf_lags: 1,
            ..PreprocessOptions::default()
        };
        let (out, report) = preprocess(&panel, &stamps(120), &opts).unwrap();
        assert!(report.integration_order >= 1);
        assert!(report
            .members_dropped_constant
            .contains(&"m6".to_string()));
        assert_eq!(out.n_members(), panel.n_members() - 1);
        assert_eq!(
            report.final_timestamps,
            120 - report.integration_order
        );
    }

    #[test]
    fn window_slicing_selects_by_name() {
        let members: Vec<SeriesPair<f64>> = (0..4).map(|i| noise_pair(100, 40 + i)).collect();
        let panel = Panel::from_members(members).unwrap();
        let opts = PreprocessOptions {
            window: Some(("t10".into(), "t89".into())),
            adf_lags: 1,
            ..PreprocessOptions::default()
        };
        let (out, report) = preprocess(&panel, &stamps(100), &opts).unwrap();
        assert_eq!(report.window, ("t10".to_string(), "t89".to_string()));
        assert_eq!(out.n_timestamps(), 80 - report.integration_order);
    }

    #[test]
    fn unknown_window_bound_is_a_domain_error() {
        let panel = Panel::from_members(vec![noise_pair(50, 1)]).unwrap();
        let opts = PreprocessOptions {
            window: Some(("t0".into(), "nope".into())),
            adf_lags: 1,
            ..PreprocessOptions::default()
        };
        assert!(matches!(
            preprocess(&panel, &stamps(50), &opts),
            Err(Error::Domain { .. })
        ));
    }
}
