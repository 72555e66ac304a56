//! Baseline panel non-causality tests built on the average member Wald
//! statistic: the asymptotic and semi-asymptotic normalizations and the block
//! bootstrap variant.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::float::Float;
use crate::granger::{granger_panel, Direction, ErrorPolicy, MemberTestResult, Panel};
use crate::numstats::{normal_cdf, ols_fit, DesignMatrix};
use crate::seeding::derive_seed;

/// Average-Wald test output.
#[derive(Debug, Clone, PartialEq)]
pub struct DhResult<F> {
    /// Average of the per-member Wald statistics.
    pub w_bar: F,
    /// sqrt(N / 2P) (w_bar - P), standard normal as T, N grow.
    pub z_asymptotic: F,
    /// sqrt(N) (w_bar - mean E(W)) / sqrt(mean Var(W)), standard normal as N
    /// grows for fixed T.
    pub z_semi: F,
    /// Two-sided normal p-value of `z_asymptotic`.
    pub p_asymptotic: F,
    /// Two-sided normal p-value of `z_semi`.
    pub p_semi: F,
    /// Per-member Wald statistics (lag order times the F statistic).
    pub per_member_wald: Vec<F>,
}

/// Two-sided standard normal p-value, 2 (1 - Phi(|z|)).
///
/// Under strong cross-sectional dependence the average Wald statistic does
/// not concentrate at its expectation, so the normalized statistic lands far
/// out in both tails; the reference implementations report the two-sided
/// probability and the documented false-discovery inflation is only
/// reproduced by it.
fn two_sided_p<F: Float>(z: F) -> F {
    (F::cast(2.0) * normal_cdf(-z.abs())).min(F::one())
}

/// Exact moments of the member Wald statistic W = P * F(P, df) under the
/// null, expressed through the effective per-member sample size.
fn wald_moments<F: Float>(t_eff: usize, p: usize) -> Result<(F, F)> {
    let df_den = t_eff as i64 - 2 * p as i64 - 1;
    if df_den < 6 {
        return Err(Error::InsufficientData {
            needed: 2 * p + 7,
            have: t_eff,
            detail: "semi-asymptotic moments need T_eff - 2P - 1 >= 6".into(),
        });
    }
    let t_eff = F::from_count(t_eff);
    let p = F::from_count(p);
    let one = F::one();
    let two = F::cast(2.0);
    let three = F::cast(3.0);
    let five = F::cast(5.0);
    let d1 = t_eff - two * p - one;
    let d3 = t_eff - two * p - three;
    let d5 = t_eff - two * p - five;
    let e_w = p * d1 / d3;
    let var_w = two * p * d1 * d1 * (t_eff - p - three) / (d3 * d3 * d5);
    Ok((e_w, var_w))
}

/// Builds the normalized statistics from per-member test results.
pub fn dh_from_member_results<F: Float>(
    results: &[MemberTestResult<F>],
    panel_timestamps: usize,
    lag_order: usize,
) -> Result<DhResult<F>> {
    if results.is_empty() {
        return Err(Error::EmptyPanel);
    }
    let n = results.len();
    let nf = F::from_count(n);
    let p = lag_order;
    let pf = F::from_count(p);
    let t_eff = panel_timestamps - p;

    let per_member_wald: Vec<F> = results.iter().map(|r| pf * r.f_stat).collect();
    let w_bar = per_member_wald.iter().copied().sum::<F>() / nf;

    let z_asymptotic = (nf / (F::cast(2.0) * pf)).sqrt() * (w_bar - pf);

    // Panels have uniform length, so the member-wise moment means reduce to
    // the single-member moments.
    let (mean_e, mean_var) = wald_moments::<F>(t_eff, p)?;
    let z_semi = nf.sqrt() * (w_bar - mean_e) / mean_var.sqrt();

    Ok(DhResult {
        w_bar,
        z_asymptotic,
        z_semi,
        p_asymptotic: two_sided_p(z_asymptotic),
        p_semi: two_sided_p(z_semi),
        per_member_wald,
    })
}

/// Average-Wald statistics for the panel. Per-member failures abort with the
/// member label.
pub fn dh_statistics<F: Float>(
    panel: &Panel<F>,
    lag_order: usize,
    direction: Direction,
) -> Result<DhResult<F>> {
    let outcome = granger_panel(panel, lag_order, direction, ErrorPolicy::Strict)?;
    dh_from_member_results(&outcome.results, panel.n_timestamps(), lag_order)
}

/// Block bootstrap output.
#[derive(Debug, Clone)]
pub struct BootstrapResult<F> {
    pub observed: DhResult<F>,
    /// Semi-asymptotic z of each bootstrap panel.
    pub bootstrap_z: Vec<F>,
    /// (1 + #{bootstrap z >= observed z}) / (breps + 1).
    pub p_value: F,
    pub breps: usize,
    pub block_size: usize,
    pub seed: u64,
}

/// Magnitude treated as overflow while rebuilding bootstrap series; explosive
/// restricted AR estimates blow past this long before the statistics mean
/// anything.
const REBUILD_LIMIT: f64 = 1e150;

/// Rebuilds one series under the null from restricted coefficients and
/// resampled residuals. Returns `None` on overflow.
fn rebuild_series<F: Float>(
    initial: &[F],
    coefficients: &[F],
    residuals: &[F],
) -> Option<Vec<F>> {
    let p = initial.len();
    let limit = F::cast(REBUILD_LIMIT);
    let mut out = Vec::with_capacity(p + residuals.len());
    out.extend_from_slice(initial);
    for (s, &res) in residuals.iter().enumerate() {
        let t = p + s;
        let mut v = coefficients[0];
        for lag in 1..=p {
            v = v + coefficients[lag] * out[t - lag];
        }
        v = v + res;
        if !v.is_finite() || v.abs() > limit {
            return None;
        }
        out.push(v);
    }
    Some(out)
}

/// Draws a resampled index sequence of `len` time positions built from
/// contiguous blocks of `block_size` drawn with replacement.
fn draw_block_indices(rng: &mut ChaCha8Rng, len: usize, block_size: usize) -> Vec<usize> {
    let max_start = len - block_size;
    let mut idx = Vec::with_capacity(len);
    while idx.len() < len {
        let start = rng.random_range(0..=max_start);
        for offset in 0..block_size {
            if idx.len() == len {
                break;
            }
            idx.push(start + offset);
        }
    }
    idx
}

/// Per-repetition redraw budget when a rebuilt series overflows; across all
/// repetitions this caps total attempts at 10 * breps.
const REDRAWS_PER_REP: usize = 10;

/// Restricted (null) model of one member: the effect regressed on an
/// intercept and its own lags.
struct NullFit<F> {
    initial: Vec<F>,
    coefficients: Vec<F>,
    residuals: Vec<F>,
    cause: Vec<F>,
}

fn fit_null_models<F: Float>(
    panel: &Panel<F>,
    lag_order: usize,
    direction: Direction,
) -> Result<Vec<NullFit<F>>> {
    let p = lag_order;
    let t = panel.n_timestamps();
    let t_eff = t - p;
    let mut fits = Vec::with_capacity(panel.n_members());
    for (member, label) in panel.members().iter().zip(panel.labels()) {
        let oriented = match direction {
            Direction::XToY => member.clone(),
            Direction::YToX => member.swapped(),
        };
        let y = oriented.y();
        let mut rows = Vec::with_capacity(t_eff);
        let mut resp = Vec::with_capacity(t_eff);
        for s in p..t {
            let mut row = Vec::with_capacity(p + 1);
            row.push(F::one());
            for lag in 1..=p {
                row.push(y[s - lag]);
            }
            rows.push(row);
            resp.push(y[s]);
        }
        let design = DesignMatrix::from_rows(&rows).map_err(|e| e.for_member(label))?;
        let fit = ols_fit(&design, &resp).map_err(|e| e.for_member(label))?;
        let mut residuals = Vec::with_capacity(t_eff);
        for (i, row) in rows.iter().enumerate() {
            let mut fitted = F::zero();
            for (v, c) in row.iter().zip(fit.coefficients.iter()) {
                fitted = fitted + *v * *c;
            }
            residuals.push(resp[i] - fitted);
        }
        fits.push(NullFit {
            initial: y[..p].to_vec(),
            coefficients: fit.coefficients,
            residuals,
            cause: oriented.x().to_vec(),
        });
    }
    Ok(fits)
}

/// Rebuilds one bootstrap panel; `None` when any member overflowed.
fn try_rebuild_panel<F: Float>(
    fits: &[NullFit<F>],
    labels: &[String],
    idx: &[usize],
) -> Result<Option<Panel<F>>> {
    let mut members = Vec::with_capacity(fits.len());
    for fit in fits {
        let resampled: Vec<F> = idx.iter().map(|&i| fit.residuals[i]).collect();
        match rebuild_series(&fit.initial, &fit.coefficients, &resampled) {
            Some(series) => {
                members.push(crate::granger::SeriesPair::new(fit.cause.clone(), series)?)
            }
            None => return Ok(None),
        }
    }
    Ok(Some(Panel::new(members, labels.to_vec())?))
}

/// Draws `breps` semi-asymptotic z statistics from null-rebuilt panels.
fn bootstrap_z_values<F: Float>(
    fits: &[NullFit<F>],
    labels: &[String],
    lag_order: usize,
    block_size: usize,
    breps: usize,
    seed: u64,
) -> Result<Vec<F>> {
    let t_eff = fits[0].residuals.len();
    let mut bootstrap_z = Vec::with_capacity(breps);
    let mut total_attempts = 0usize;
    for rep in 0..breps {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[rep as u64]));
        let mut rebuilt = None;
        for _ in 0..REDRAWS_PER_REP {
            total_attempts += 1;
            // One index sequence shared across members preserves the
            // cross-sectional dependence of the residuals.
            let idx = draw_block_indices(&mut rng, t_eff, block_size);
            if let Some(panel) = try_rebuild_panel(fits, labels, &idx)? {
                rebuilt = Some(panel);
                break;
            }
        }
        let boot_panel = rebuilt.ok_or(Error::NonFiniteBootstrapSeries {
            attempts: total_attempts,
        })?;
        // Members are already oriented cause-first.
        let stats = dh_statistics(&boot_panel, lag_order, Direction::XToY)?;
        bootstrap_z.push(stats.z_semi);
    }
    Ok(bootstrap_z)
}

/// Block-bootstrap version of the average-Wald test.
///
/// The restricted (null) model is fitted per member, residual vectors are
/// resampled in blocks with replacement and the effect series are rebuilt
/// recursively under the null, starting from the observed initial values.
/// One index sequence per repetition is shared by every member, so the
/// resampled innovations keep their cross-sectional structure. The bootstrap
/// p-value compares the observed semi-asymptotic z against the resampled
/// ones. Repetitions draw from streams derived from (seed, repetition), so
/// the result is reproducible.
pub fn dh_block_bootstrap<F: Float>(
    panel: &Panel<F>,
    lag_order: usize,
    direction: Direction,
    breps: usize,
    block_size: usize,
    seed: u64,
) -> Result<BootstrapResult<F>> {
    if breps == 0 {
        return Err(Error::domain("breps must be at least 1"));
    }
    let observed = dh_statistics(panel, lag_order, direction)?;

    let t_eff = panel.n_timestamps() - lag_order;
    if block_size == 0 || block_size > t_eff {
        return Err(Error::domain(format!("block_size must lie in 1..={t_eff}")));
    }

    let fits = fit_null_models(panel, lag_order, direction)?;
    let bootstrap_z = bootstrap_z_values(
        &fits,
        panel.labels(),
        lag_order,
        block_size,
        breps,
        seed,
    )?;

    let exceed = bootstrap_z
        .iter()
        .filter(|&&z| z >= observed.z_semi)
        .count();
    let p_value = F::from_count(1 + exceed) / F::from_count(breps + 1);
    Ok(BootstrapResult {
        observed,
        bootstrap_z,
        p_value,
        breps,
        block_size,
        seed,
    })
}
