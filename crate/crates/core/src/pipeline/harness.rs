//! Monte-Carlo power and false-discovery-rate evaluation over a (T, N) grid,
//! plus the gamma sweep for simulated and real panels.

use std::io::Write;
use std::path::Path;

use rand::distr::uniform::SampleUniform;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::aggregation::{qppa_fixed, reject};
use crate::dh::{dh_block_bootstrap, dh_from_member_results};
use crate::error::{Error, Result};
use crate::float::Float;
use crate::granger::{granger_panel, Direction, ErrorPolicy, Panel};
use crate::seeding::derive_seed;
use crate::simulate::{simulate_panel, SimConfig};

/// Panel-level test selected in the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    /// Quantile aggregation of member p-values.
    Qppa,
    /// Semi-asymptotic average-Wald test.
    Dh,
    /// Block-bootstrap average-Wald test.
    DhBb,
}

impl std::fmt::Display for TestMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TestMethod::Qppa => write!(f, "qppa"),
            TestMethod::Dh => write!(f, "dh"),
            TestMethod::DhBb => write!(f, "dh-bb"),
        }
    }
}

impl std::str::FromStr for TestMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qppa" => Ok(TestMethod::Qppa),
            "dh" => Ok(TestMethod::Dh),
            "dh-bb" | "dh_bb" | "dhbb" => Ok(TestMethod::DhBb),
            other => Err(Error::config(format!("unknown method '{other}'"))),
        }
    }
}

/// Harness options shared by the grid run and the sweeps.
#[derive(Debug, Clone)]
pub struct HarnessOptions {
    pub methods: Vec<TestMethod>,
    pub repetitions: usize,
    pub alpha: f64,
    /// Quantile level of the aggregation rule.
    pub gamma: f64,
    pub lag_order: usize,
    /// Bootstrap repetitions for the block-bootstrap method.
    pub breps: usize,
    pub block_size: usize,
    pub seed: u64,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            methods: vec![TestMethod::Qppa, TestMethod::Dh, TestMethod::DhBb],
            repetitions: 100,
            alpha: 0.05,
            gamma: 0.5,
            lag_order: 1,
            breps: 20,
            block_size: 1,
            seed: 0,
        }
    }
}

/// One (T, N, method) cell of the report.
#[derive(Debug, Clone, Serialize)]
pub struct CellResult {
    pub n_timestamps: usize,
    pub n_members: usize,
    pub method: TestMethod,
    /// Fraction of causal panels rejected.
    pub power: f64,
    /// Null rejections over all rejections; 0 when nothing was rejected.
    pub fdr: f64,
    pub causal_rejections: usize,
    pub null_rejections: usize,
    /// Repetitions excluded because a test errored.
    pub failed_repetitions: usize,
}

/// Power/FDR over the whole grid.
#[derive(Debug, Clone, Serialize)]
pub struct PowerFdrReport {
    pub repetitions: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub cells: Vec<CellResult>,
}

impl PowerFdrReport {
    pub fn cell(&self, t: usize, n: usize, method: TestMethod) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.n_timestamps == t && c.n_members == n && c.method == method)
    }

    /// Plain-text table: one row per (T, N), power and FDR per method.
    pub fn to_table(&self) -> String {
        let mut methods: Vec<TestMethod> = Vec::new();
        for c in &self.cells {
            if !methods.contains(&c.method) {
                methods.push(c.method);
            }
        }
        let mut grid: Vec<(usize, usize)> = Vec::new();
        for c in &self.cells {
            if !grid.contains(&(c.n_timestamps, c.n_members)) {
                grid.push((c.n_timestamps, c.n_members));
            }
        }
        let mut out = String::new();
        out.push_str(&format!("{:>6} {:>6}", "T", "N"));
        for m in &methods {
            out.push_str(&format!(" {:>12} {:>8}", format!("{m} power"), "FDR"));
        }
        out.push('\n');
        for (t, n) in grid {
            out.push_str(&format!("{t:>6} {n:>6}"));
            for m in &methods {
                match self.cell(t, n, *m) {
                    Some(c) => {
                        out.push_str(&format!(" {:>12.3} {:>8.3}", c.power, c.fdr));
                    }
                    None => out.push_str(&format!(" {:>12} {:>8}", "-", "-")),
                }
            }
            out.push('\n');
        }
        out
    }
}

impl std::fmt::Display for PowerFdrReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_table())
    }
}

/// Arm tags for seed derivation.
const ARM_CAUSAL: u64 = 0;
const ARM_NULL: u64 = 1;
const ARM_BOOTSTRAP: u64 = 7;

/// Repetition-level failures that are recorded and excluded rather than
/// aborting the whole run.
fn is_recoverable(e: &Error) -> bool {
    matches!(
        e,
        Error::DegenerateSeries { .. }
            | Error::RankDeficient { .. }
            | Error::Member { .. }
            | Error::NonFiniteBootstrapSeries { .. }
    )
}

fn configure(template: &SimConfig, t: usize, n: usize, causal: bool, seed: u64) -> SimConfig {
    SimConfig {
        n_members: n,
        n_timestamps: t,
        causal,
        seed,
        ..template.clone()
    }
}

/// Panel p-value of one method; the bootstrap needs its own seed.
fn method_p_value<F>(
    method: TestMethod,
    panel: &Panel<F>,
    member_p: &[F],
    member_results: &[crate::granger::MemberTestResult<F>],
    opts: &HarnessOptions,
    bootstrap_seed: u64,
) -> Result<F>
where
    F: Float,
{
    match method {
        TestMethod::Qppa => Ok(qppa_fixed(member_p, F::cast(opts.gamma))?.p_value),
        TestMethod::Dh => Ok(dh_from_member_results(
            member_results,
            panel.n_timestamps(),
            opts.lag_order,
        )?
        .p_semi),
        TestMethod::DhBb => Ok(dh_block_bootstrap(
            panel,
            opts.lag_order,
            Direction::XToY,
            opts.breps,
            opts.block_size,
            bootstrap_seed,
        )?
        .p_value),
    }
}

/// Runs the grid: per cell and repetition, one causal and one matched null
/// panel are simulated and tested in the x-to-y direction; power is the
/// causal rejection rate and FDR the ratio of null rejections to all
/// rejections. Deterministic given the seed.
pub fn run_power_fdr<F>(
    template: &SimConfig,
    grid: &[(usize, usize)],
    opts: &HarnessOptions,
) -> Result<PowerFdrReport>
where
    F: Float + SampleUniform,
    StandardNormal: Distribution<F>,
{
    if opts.repetitions == 0 {
        return Err(Error::config("repetitions must be at least 1"));
    }
    if grid.is_empty() {
        return Err(Error::config("grid must contain at least one (T, N) cell"));
    }
    let alpha = F::cast(opts.alpha);
    let mut cells = Vec::new();
    for (cell_idx, &(t, n)) in grid.iter().enumerate() {
        let ci = cell_idx as u64;
        struct Tally {
            causal: usize,
            null: usize,
            failed: usize,
        }
        let mut tallies: Vec<Tally> = opts
            .methods
            .iter()
            .map(|_| Tally {
                causal: 0,
                null: 0,
                failed: 0,
            })
            .collect();

        for rep in 0..opts.repetitions {
            let r = rep as u64;
            let causal_cfg = configure(
                template,
                t,
                n,
                true,
                derive_seed(opts.seed, &[ci, r, ARM_CAUSAL]),
            );
            let null_cfg = configure(
                template,
                t,
                n,
                false,
                derive_seed(opts.seed, &[ci, r, ARM_NULL]),
            );
            let causal = simulate_panel::<F>(&causal_cfg)?;
            let null = simulate_panel::<F>(&null_cfg)?;
            let arms = [&causal.panel, &null.panel];
            let mut member_outcomes = Vec::with_capacity(2);
            let mut rep_failed = false;
            for panel in arms {
                match granger_panel(panel, opts.lag_order, Direction::XToY, ErrorPolicy::Strict) {
                    Ok(o) => member_outcomes.push(o),
                    Err(e) if is_recoverable(&e) => {
                        rep_failed = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if rep_failed {
                for tally in &mut tallies {
                    tally.failed += 1;
                }
                continue;
            }

            for (mi, &method) in opts.methods.iter().enumerate() {
                let mut decisions = [false, false];
                let mut method_failed = false;
                for (arm, (panel, outcome)) in
                    arms.iter().zip(member_outcomes.iter()).enumerate()
                {
                    let p = method_p_value(
                        method,
                        panel,
                        &outcome.p_values(),
                        &outcome.results,
                        opts,
                        derive_seed(opts.seed, &[ci, r, arm as u64, ARM_BOOTSTRAP]),
                    );
                    match p {
                        Ok(p) => decisions[arm] = reject(p, alpha)?,
                        Err(e) if is_recoverable(&e) => {
                            method_failed = true;
                            break;
                        }
                        Err(e) => return Err(e),
                    }
                }
                if method_failed {
                    tallies[mi].failed += 1;
                } else {
                    if decisions[0] {
                        tallies[mi].causal += 1;
                    }
                    if decisions[1] {
                        tallies[mi].null += 1;
                    }
                }
            }
        }

        for (mi, &method) in opts.methods.iter().enumerate() {
            let tally = &tallies[mi];
            let effective = opts.repetitions - tally.failed;
            let power = if effective > 0 {
                tally.causal as f64 / effective as f64
            } else {
                0.0
            };
            let discoveries = tally.causal + tally.null;
            let fdr = if discoveries > 0 {
                tally.null as f64 / discoveries as f64
            } else {
                0.0
            };
            cells.push(CellResult {
                n_timestamps: t,
                n_members: n,
                method,
                power,
                fdr,
                causal_rejections: tally.causal,
                null_rejections: tally.null,
                failed_repetitions: tally.failed,
            });
        }
    }
    Ok(PowerFdrReport {
        repetitions: opts.repetitions,
        alpha: opts.alpha,
        gamma: opts.gamma,
        cells,
    })
}

/// One point of a gamma sweep.
#[derive(Debug, Clone, Serialize)]
pub struct GammaSweepPoint {
    pub gamma: f64,
    pub power: f64,
    pub fdr: f64,
}

/// Gamma sweep on simulated data: panels and member p-values are generated
/// once per repetition (with the same seed derivation as a one-cell
/// [`run_power_fdr`]) and re-aggregated for every gamma, so a single-gamma
/// sweep matches the grid runner exactly.
pub fn gamma_sweep_sim<F>(
    template: &SimConfig,
    t: usize,
    n: usize,
    gammas: &[f64],
    opts: &HarnessOptions,
) -> Result<Vec<GammaSweepPoint>>
where
    F: Float + SampleUniform,
    StandardNormal: Distribution<F>,
{
    if gammas.iter().any(|&g| !(g > 0.0 && g < 1.0)) {
        return Err(Error::domain("every gamma must lie in (0, 1)"));
    }
    let alpha = F::cast(opts.alpha);
    let mut causal_hits = vec![0usize; gammas.len()];
    let mut null_hits = vec![0usize; gammas.len()];
    for rep in 0..opts.repetitions {
        let r = rep as u64;
        let causal_cfg = configure(
            template,
            t,
            n,
            true,
            derive_seed(opts.seed, &[0, r, ARM_CAUSAL]),
        );
        let null_cfg = configure(
            template,
            t,
            n,
            false,
            derive_seed(opts.seed, &[0, r, ARM_NULL]),
        );
        let causal = simulate_panel::<F>(&causal_cfg)?;
        let null = simulate_panel::<F>(&null_cfg)?;
        let p_causal = granger_panel(
            &causal.panel,
            opts.lag_order,
            Direction::XToY,
            ErrorPolicy::Strict,
        )?
        .p_values();
        let p_null = granger_panel(
            &null.panel,
            opts.lag_order,
            Direction::XToY,
            ErrorPolicy::Strict,
        )?
        .p_values();
        for (gi, &gamma) in gammas.iter().enumerate() {
            let g = F::cast(gamma);
            if reject(qppa_fixed(&p_causal, g)?.p_value, alpha)? {
                causal_hits[gi] += 1;
            }
            if reject(qppa_fixed(&p_null, g)?.p_value, alpha)? {
                null_hits[gi] += 1;
            }
        }
    }
    Ok(gammas
        .iter()
        .enumerate()
        .map(|(gi, &gamma)| {
            let s = causal_hits[gi];
            let v = null_hits[gi];
            GammaSweepPoint {
                gamma,
                power: s as f64 / opts.repetitions as f64,
                fdr: if s + v > 0 {
                    v as f64 / (s + v) as f64
                } else {
                    0.0
                },
            }
        })
        .collect())
}

/// Gamma sweep on a real panel: per repetition a random member subset is
/// tested in both directions and scored against the declared ground-truth
/// direction; false discoveries are rejections of the reverse direction.
pub fn gamma_sweep_panel<F>(
    panel: &Panel<F>,
    truth: Direction,
    subset_size: usize,
    gammas: &[f64],
    opts: &HarnessOptions,
) -> Result<Vec<GammaSweepPoint>>
where
    F: Float,
{
    if gammas.iter().any(|&g| !(g > 0.0 && g < 1.0)) {
        return Err(Error::domain("every gamma must lie in (0, 1)"));
    }
    if subset_size == 0 || subset_size > panel.n_members() {
        return Err(Error::config(format!(
            "subset size must lie in 1..={}",
            panel.n_members()
        )));
    }
    let alpha = F::cast(opts.alpha);
    let mut true_hits = vec![0usize; gammas.len()];
    let mut false_hits = vec![0usize; gammas.len()];
    for rep in 0..opts.repetitions {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, &[rep as u64]));
        let indices =
            rand::seq::index::sample(&mut rng, panel.n_members(), subset_size).into_vec();
        let subset = panel.subset(&indices)?;
        let fwd = granger_panel(&subset, opts.lag_order, truth, ErrorPolicy::Lenient)?;
        let rev = granger_panel(
            &subset,
            opts.lag_order,
            truth.reversed(),
            ErrorPolicy::Lenient,
        )?;
        let p_fwd = fwd.p_values();
        let p_rev = rev.p_values();
        for (gi, &gamma) in gammas.iter().enumerate() {
            let g = F::cast(gamma);
            if reject(qppa_fixed(&p_fwd, g)?.p_value, alpha)? {
                true_hits[gi] += 1;
            }
            if reject(qppa_fixed(&p_rev, g)?.p_value, alpha)? {
                false_hits[gi] += 1;
            }
        }
    }
    Ok(gammas
        .iter()
        .enumerate()
        .map(|(gi, &gamma)| {
            let s = true_hits[gi];
            let v = false_hits[gi];
            GammaSweepPoint {
                gamma,
                power: s as f64 / opts.repetitions as f64,
                fdr: if s + v > 0 {
                    v as f64 / (s + v) as f64
                } else {
                    0.0
                },
            }
        })
        .collect())
}

/// Writes sweep points as a tab-separated data file (gamma, power, fdr).
pub fn write_sweep_tsv(points: &[GammaSweepPoint], path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    writeln!(file, "gamma\tpower\tfdr").map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    for p in points {
        writeln!(file, "{}\t{}\t{}", p.gamma, p.power, p.fdr).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
    }
    Ok(())
}
