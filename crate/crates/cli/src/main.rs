//! `qppa`: panel Granger non-causality testing from the command line.

mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qppa_core::aggregation::{qppa_fixed, qppa_gamma_min, reject, DEFAULT_GRID_SIZE};
use qppa_core::dh::{dh_block_bootstrap, dh_statistics};
use qppa_core::granger::{granger_panel, Direction, ErrorPolicy};
use qppa_core::pipeline::{
    directional_study, gamma_sweep_panel, gamma_sweep_sim, preprocess, run_power_fdr,
    write_long_csv, write_sweep_tsv, HarnessOptions, PreprocessOptions, TestMethod,
};
use qppa_core::simulate::{simulate_panel, SimConfig};
use qppa_core::stationarity::{integration_order_search, RegressionKind};
use qppa_core::Error;

use input::PanelInput;

#[derive(Parser)]
#[command(
    name = "qppa",
    about = "Granger non-causality tests for panel time series",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMethod {
    Qppa,
    Dh,
    DhBb,
}

impl From<CliMethod> for TestMethod {
    fn from(m: CliMethod) -> Self {
        match m {
            CliMethod::Qppa => TestMethod::Qppa,
            CliMethod::Dh => TestMethod::Dh,
            CliMethod::DhBb => TestMethod::DhBb,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CliDirection {
    XToY,
    YToX,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliRegression {
    Constant,
    ConstantTrend,
    None,
}

impl From<CliRegression> for RegressionKind {
    fn from(k: CliRegression) -> Self {
        match k {
            CliRegression::Constant => RegressionKind::Constant,
            CliRegression::ConstantTrend => RegressionKind::ConstantTrend,
            CliRegression::None => RegressionKind::NoDeterministic,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic panel from a config file and write it as CSV.
    Simulate(SimulateArgs),
    /// Run a panel non-causality test on a CSV panel.
    Test(TestArgs),
    /// Panel unit-root testing and order-of-integration search.
    Adf(AdfArgs),
    /// Window, standardize, difference to stationarity and drop constants.
    Preprocess(PreprocessArgs),
    /// Monte-Carlo power and FDR over a (T, N) grid.
    PowerFdr(PowerFdrArgs),
    /// Power and FDR per aggregation level gamma.
    GammaSweep(GammaSweepArgs),
    /// Both-direction study across lag orders with pruning verdicts.
    Study(StudyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Generation config (key-value text, see README).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV (long format).
    #[arg(long)]
    out: PathBuf,
    /// Override the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    input: PanelInput,
    #[arg(long, value_enum, default_value = "qppa")]
    method: CliMethod,
    /// Lag order P.
    #[arg(long, default_value_t = 1)]
    lags: usize,
    /// Aggregation quantile level.
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Use the adaptive rule with this lower bound instead of fixed gamma.
    #[arg(long)]
    gamma_min: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "both")]
    direction: CliDirection,
    /// Bootstrap repetitions (dh-bb).
    #[arg(long, default_value_t = 20)]
    breps: usize,
    /// Residual block size (dh-bb).
    #[arg(long, default_value_t = 1)]
    block_size: usize,
    /// RNG seed; required for dh-bb.
    #[arg(long)]
    seed: Option<u64>,
    /// Skip members whose test fails instead of aborting.
    #[arg(long)]
    lenient: bool,
    /// Write the results as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AdfArgs {
    #[command(flatten)]
    input: PanelInput,
    /// Lagged differences in the ADF regression.
    #[arg(long, default_value_t = 12)]
    lags: usize,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "constant")]
    kind: CliRegression,
    /// Highest differencing order to try.
    #[arg(long, default_value_t = 5)]
    max_order: usize,
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct PreprocessArgs {
    #[command(flatten)]
    input: PanelInput,
    /// First timestamp of the analysis window (header name).
    #[arg(long)]
    window_start: Option<String>,
    /// Last timestamp of the analysis window (header name).
    #[arg(long)]
    window_end: Option<String>,
    #[arg(long, default_value_t = 12)]
    adf_lags: usize,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 5)]
    max_order: usize,
    /// Output CSV (long format) with the preprocessed panel.
    #[arg(long)]
    out: PathBuf,
    /// Write the preprocessing report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct PowerFdrArgs {
    /// Generation config used as the template.
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated list of panel lengths T.
    #[arg(long, value_delimiter = ',', required = true)]
    t_values: Vec<usize>,
    /// Comma-separated list of member counts N.
    #[arg(long, value_delimiter = ',', required = true)]
    n_values: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [CliMethod::Qppa, CliMethod::Dh, CliMethod::DhBb])]
    methods: Vec<CliMethod>,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 1)]
    lags: usize,
    #[arg(long, default_value_t = 20)]
    breps: usize,
    #[arg(long, default_value_t = 1)]
    block_size: usize,
    #[arg(long)]
    seed: u64,
    /// Write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GammaSweepArgs {
    /// Generation config (simulated sweep). Mutually exclusive with a panel
    /// input.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Panel length T (simulated sweep).
    #[arg(long)]
    t: Option<usize>,
    /// Member count N (simulated sweep).
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    input: PanelInput,
    /// Members drawn per repetition (panel sweep).
    #[arg(long)]
    subset_size: Option<usize>,
    /// Ground-truth direction to score against (panel sweep).
    #[arg(long, value_enum, default_value = "x-to-y")]
    truth: CliDirection,
    /// Gamma grid as start:end:step, e.g. 0.01:0.99:0.01.
    #[arg(long, default_value = "0.01:0.99:0.01")]
    gammas: String,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    lags: usize,
    #[arg(long)]
    seed: u64,
    /// Output data file (gamma, power, fdr columns, tab-separated).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    input: PanelInput,
    /// Lag orders, e.g. 1,2,3 or 1-12.
    #[arg(long, default_value = "1-12")]
    lags: String,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [CliMethod::Qppa, CliMethod::Dh, CliMethod::DhBb])]
    methods: Vec<CliMethod>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 20)]
    breps: usize,
    #[arg(long, default_value_t = 1)]
    block_size: usize,
    /// RNG seed; required when dh-bb is among the methods.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lenient: bool,
    /// Write the study as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::Join { .. }
        | Error::Config { .. }
        | Error::Io { .. }
        | Error::Domain { .. }
        | Error::DimensionMismatch { .. } => 2,
        Error::InsufficientData { .. }
        | Error::DegenerateSeries { .. }
        | Error::RankDeficient { .. }
        | Error::Numerical { .. } => 3,
        Error::OrderNotFound { .. }
        | Error::EmptyPanel
        | Error::NonFiniteBootstrapSeries { .. } => 4,
        Error::Member { source, .. } => exit_code_for(source),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Test(args) => cmd_test(args),
        Command::Adf(args) => cmd_adf(args),
        Command::Preprocess(args) => cmd_preprocess(args),
        Command::PowerFdr(args) => cmd_power_fdr(args),
        Command::GammaSweep(args) => cmd_gamma_sweep(args),
        Command::Study(args) => cmd_study(args),
    }
}

fn read_config(path: &PathBuf) -> Result<SimConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    SimConfig::from_config_str(&text)
}

fn write_json<T: serde::Serialize>(value: &T, path: &PathBuf) -> Result<(), Error> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config { detail: format!("serialize report: {e}") })?;
    std::fs::write(path, json).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    let mut config = read_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out = simulate_panel::<f64>(&config)?;
    write_long_csv(&out.panel, None, &args.out)?;
    let causal_members = out.ground_truth.iter().filter(|&&g| g).count();
    println!(
        "wrote {} members x {} timestamps to {} ({} causal members)",
        out.panel.n_members(),
        out.panel.n_timestamps(),
        args.out.display(),
        causal_members
    );
    Ok(())
}

fn directions(d: CliDirection) -> Vec<Direction> {
    match d {
        CliDirection::XToY => vec![Direction::XToY],
        CliDirection::YToX => vec![Direction::YToX],
        CliDirection::Both => vec![Direction::XToY, Direction::YToX],
    }
}

fn policy(lenient: bool) -> ErrorPolicy {
    if lenient {
        ErrorPolicy::Lenient
    } else {
        ErrorPolicy::Strict
    }
}

fn cmd_test(args: TestArgs) -> Result<(), Error> {
    if matches!(args.method, CliMethod::DhBb) && args.seed.is_none() {
        return Err(Error::Config {
            detail: "--seed is required for the dh-bb method".into(),
        });
    }
    let ingested = args.input.load()?;
    let panel = &ingested.panel;
    if !ingested.dropped_missing.is_empty() {
        eprintln!(
            "dropped {} members with missing values: {}",
            ingested.dropped_missing.len(),
            ingested.dropped_missing.join(", ")
        );
    }

    #[derive(serde::Serialize)]
    struct DirectionReport {
        direction: String,
        p_value: f64,
        reject: bool,
        n_members_tested: usize,
        skipped: Vec<String>,
    }
    let mut reports = Vec::new();
    for direction in directions(args.direction) {
        let (p_value, used, skipped): (f64, usize, Vec<String>) = match args.method {
            CliMethod::Qppa => {
                let outcome = granger_panel(panel, args.lags, direction, policy(args.lenient))?;
                let p_values = outcome.p_values();
                let agg = match args.gamma_min {
                    Some(gm) => qppa_gamma_min(&p_values, gm, DEFAULT_GRID_SIZE)?,
                    None => qppa_fixed(&p_values, args.gamma)?,
                };
                (
                    agg.p_value,
                    p_values.len(),
                    outcome.skipped.iter().map(|s| s.label.clone()).collect(),
                )
            }
            CliMethod::Dh => {
                let r = dh_statistics(panel, args.lags, direction)?;
                (r.p_semi, panel.n_members(), Vec::new())
            }
            CliMethod::DhBb => {
                let r = dh_block_bootstrap(
                    panel,
                    args.lags,
                    direction,
                    args.breps,
                    args.block_size,
                    args.seed.unwrap(),
                )?;
                (r.p_value, panel.n_members(), Vec::new())
            }
        };
        let decision = reject(p_value, args.alpha)?;
        println!(
            "{direction}: p = {p_value:.6} -> {} (alpha = {}, {} members)",
            if decision { "reject" } else { "no rejection" },
            args.alpha,
            used
        );
        if !skipped.is_empty() {
            eprintln!("  skipped members: {}", skipped.join(", "));
        }
        reports.push(DirectionReport {
            direction: direction.to_string(),
            p_value,
            reject: decision,
            n_members_tested: used,
            skipped,
        });
    }
    if let Some(out) = &args.out {
        write_json(&reports, out)?;
    }
    Ok(())
}

fn cmd_adf(args: AdfArgs) -> Result<(), Error> {
    let ingested = args.input.load()?;
    let report = integration_order_search(
        &ingested.panel,
        args.lags,
        args.kind.into(),
        args.gamma,
        args.alpha,
        args.max_order,
        policy(args.lenient),
    )?;
    println!("{:>3} {:>14} {:>14}", "d", "p(x panel)", "p(y panel)");
    for (d, px, py) in &report.per_order_pvalues {
        println!("{d:>3} {px:>14.6e} {py:>14.6e}");
    }
    println!(
        "panel is integrated of order {} (gamma = {}, alpha = {})",
        report.order, report.gamma, args.alpha
    );
    Ok(())
}

fn cmd_preprocess(args: PreprocessArgs) -> Result<(), Error> {
    let ingested = args.input.load()?;
    let window = match (args.window_start, args.window_end) {
        (Some(s), Some(e)) => Some((s, e)),
        (None, None) => None,
        _ => {
            return Err(Error::Config {
                detail: "--window-start and --window-end must be given together".into(),
            })
        }
    };
    let opts = PreprocessOptions {
        window,
        adf_lags: args.adf_lags,
        regression_kind: RegressionKind::Constant,
        gamma: args.gamma,
        alpha: args.alpha,
        max_order: args.max_order,
        dropped_missing: ingested.dropped_missing.clone(),
    };
    let (panel, report) = preprocess(&ingested.panel, &ingested.timestamps, &opts)?;
    write_long_csv(&panel, None, &args.out)?;
    println!(
        "order d = {}, kept {} members x {} timestamps (dropped: {} missing, {} constant)",
        report.integration_order,
        report.final_members,
        report.final_timestamps,
        report.members_dropped_missing.len(),
        report.members_dropped_constant.len()
    );
    if let Some(path) = &args.report {
        write_json(&report, path)?;
    }
    Ok(())
}

fn cmd_power_fdr(args: PowerFdrArgs) -> Result<(), Error> {
    let template = read_config(&args.config)?;
    let mut grid = Vec::new();
    for &t in &args.t_values {
        for &n in &args.n_values {
            grid.push((t, n));
        }
    }
    let opts = HarnessOptions {
        methods: args.methods.iter().map(|&m| m.into()).collect(),
        repetitions: args.reps,
        alpha: args.alpha,
        gamma: args.gamma,
        lag_order: args.lags,
        breps: args.breps,
        block_size: args.block_size,
        seed: args.seed,
    };
    let report = run_power_fdr::<f64>(&template, &grid, &opts)?;
    print!("{report}");
    if let Some(out) = &args.out {
        write_json(&report, out)?;
    }
    Ok(())
}

fn parse_gamma_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let bad = |d: &str| Error::Config {
        detail: format!("invalid gamma grid '{spec}': {d}"),
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [list] => list
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| bad(&e.to_string())))
            .collect::<Result<Vec<f64>, Error>>()?,
        [start, end, step] => {
            let start: f64 = start.parse().map_err(|_| bad("bad start"))?;
            let end: f64 = end.parse().map_err(|_| bad("bad end"))?;
            let step: f64 = step.parse().map_err(|_| bad("bad step"))?;
            if step <= 0.0 {
                return Err(bad("step must be positive"));
            }
            let mut grid = Vec::new();
            let mut i = 0usize;
            loop {
                let g = start + i as f64 * step;
                if g > end + 1e-12 {
                    break;
                }
                grid.push((g * 1e12).round() / 1e12);
                i += 1;
            }
            grid
        }
        _ => return Err(bad("expected start:end:step or a comma list")),
    };
    if grid.is_empty() {
        return Err(bad("empty grid"));
    }
    Ok(grid)
}

fn cmd_gamma_sweep(args: GammaSweepArgs) -> Result<(), Error> {
    let gammas = parse_gamma_grid(&args.gammas)?;
    let opts = HarnessOptions {
        methods: vec![TestMethod::Qppa],
        repetitions: args.reps,
        alpha: args.alpha,
        gamma: 0.5,
        lag_order: args.lags,
        breps: 20,
        block_size: 1,
        seed: args.seed,
    };
    let points = match (&args.config, args.input.is_given()) {
        (Some(config), false) => {
            let template = read_config(config)?;
            let t = args.t.unwrap_or(template.n_timestamps);
            let n = args.n.unwrap_or(template.n_members);
            gamma_sweep_sim::<f64>(&template, t, n, &gammas, &opts)?
        }
        (None, true) => {
            let subset = args.subset_size.ok_or_else(|| Error::Config {
                detail: "--subset-size is required for a panel sweep".into(),
            })?;
            let truth = match args.truth {
                CliDirection::XToY => Direction::XToY,
                CliDirection::YToX => Direction::YToX,
                CliDirection::Both => {
                    return Err(Error::Config {
                        detail: "--truth must be x-to-y or y-to-x".into(),
                    })
                }
            };
            let ingested = args.input.load()?;
            gamma_sweep_panel(&ingested.panel, truth, subset, &gammas, &opts)?
        }
        _ => {
            return Err(Error::Config {
                detail: "give either --config (simulated) or a panel input, not both".into(),
            })
        }
    };
    write_sweep_tsv(&points, &args.out)?;
    println!(
        "wrote {} gamma points to {}",
        points.len(),
        args.out.display()
    );
    Ok(())
}

fn parse_lag_list(spec: &str) -> Result<Vec<usize>, Error> {
    let bad = || Error::Config {
        detail: format!("invalid lag list '{spec}' (use 1,2,3 or 1-12)"),
    };
    if let Some((a, b)) = spec.split_once('-') {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a == 0 || b < a {
            return Err(bad());
        }
        Ok((a..=b).collect())
    } else {
        let lags = spec
            .split(',')
            .map(|v| v.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<usize>, Error>>()?;
        if lags.is_empty() || lags.contains(&0) {
            return Err(bad());
        }
        Ok(lags)
    }
}

fn cmd_study(args: StudyArgs) -> Result<(), Error> {
    let methods: Vec<TestMethod> = args.methods.iter().map(|&m| m.into()).collect();
    if methods.contains(&TestMethod::DhBb) && args.seed.is_none() {
        return Err(Error::Config {
            detail: "--seed is required when dh-bb is among the methods".into(),
        });
    }
    let lags = parse_lag_list(&args.lags)?;
    let ingested = args.input.load()?;
    let study = directional_study(
        &ingested.panel,
        &lags,
        &methods,
        args.alpha,
        args.gamma,
        args.breps,
        args.block_size,
        args.seed.unwrap_or(0),
        policy(args.lenient),
    )?;
    print!("{study}");
    if let Some(out) = &args.out {
        write_json(&study, out)?;
    }
    Ok(())
}
