//! `mirrorboot` command line: run a test on a data file, run validity/power
//! simulations and grids, and report population moments. Every table is
//! written as CSV with LF line endings and shortest round-trip numbers.
//!
//! Simulation and grid tables use the columns
//! `dist,g,h,mode,effect,n,method,reps,rejections,rate,mc_se,seed`
//! (`g` and `h` are empty for the benchmark populations).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::distributions::{DistributionSpec, Population};
use crate::error::{DistributionError, SimulationError, TestError};
use crate::hypothesis::{run_test, Method, Sample, TestSettings, DEFAULT_ALPHA, DEFAULT_B_REPS};
use crate::rng::RngStream;
use crate::simulation::{
    run_experiment, run_grid, ExperimentConfig, ExperimentResult, GridAxis, GridSpec, Mode, DEFAULT_POWER_REPS,
    DEFAULT_VALIDITY_REPS,
};

pub const SIMULATION_HEADER: [&str; 12] = [
    "dist",
    "g",
    "h",
    "mode",
    "effect",
    "n",
    "method",
    "reps",
    "rejections",
    "rate",
    "mc_se",
    "seed",
];
pub const TEST_HEADER: [&str; 6] = ["method", "n", "mean", "mu0", "p_value", "reject"];
pub const DIST_HEADER: [&str; 7] = ["dist", "g", "h", "mean", "sd", "skewness", "kurtosis"];

#[derive(Debug, Parser)]
#[command(
    name = "mirrorboot",
    version,
    about = "Mirror bootstrap test for one mean, with simulation harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test H0: mu = mu0 on a file of observations
    Test(TestArgs),
    /// Estimate rejection rates for one configuration
    Simulate(SimulateArgs),
    /// Sweep g, h or n and estimate rejection rates per cell
    Grid(GridArgs),
    /// Print mean, sd, skewness and kurtosis of a population
    Dist(DistArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistName {
    Normal,
    Gamma22,
    Gamma22Mirror,
    Bimodal,
    Gh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeName {
    Validity,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisName {
    G,
    H,
    N,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Observations, one decimal literal per line
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub mu0: f64,
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    /// Bootstrap resamples
    #[arg(long = "b", default_value_t = DEFAULT_B_REPS)]
    pub b_reps: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PopulationArgs {
    #[arg(long = "dist", value_enum)]
    pub dist: DistName,
    /// g-and-h skewness parameter
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
    /// g-and-h tail parameter
    #[arg(long)]
    pub h: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub population: PopulationArgs,
    #[arg(long, value_enum)]
    pub mode: ModeName,
    /// Location shift of the sampled population (power mode)
    #[arg(long, allow_negative_numbers = true)]
    pub effect: Option<f64>,
    /// Replications (default 10000 for validity, 1000 for power)
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long = "b", default_value_t = DEFAULT_B_REPS)]
    pub b_reps: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Comma-separated subset of mirror,shift,t
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "mirror,shift,t")]
    pub methods: Vec<Method>,
    #[arg(long)]
    pub seed: u64,
    /// Worker threads; output does not depend on it
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write the CSV here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, value_enum)]
    pub axis: AxisName,
    /// Comma-separated axis values
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub values: Vec<f64>,
    /// Sample size (required unless sweeping n)
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[command(flatten)]
    pub population: PopulationArgs,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: line {line}: not a number")]
    NotANumber { path: String, line: usize },
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error(transparent)]
    Test(#[from] TestError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0} grid cell(s) failed")]
    GridCells(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::NotANumber { .. } => 2,
            _ => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses the arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return 2;
            }
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Test(args) => cmd_test(&args, stdout),
        Command::Simulate(args) => cmd_simulate(&args, stdout, stderr),
        Command::Grid(args) => cmd_grid(&args, stdout, stderr),
        Command::Dist(args) => cmd_dist(&args, stdout),
    }
}

/// Reads one decimal literal per line, skipping blank lines.
pub fn parse_observations(text: &str, path: &str) -> Result<Vec<f64>, CliError> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => {
                return Err(CliError::NotANumber {
                    path: path.to_string(),
                    line: i + 1,
                })
            }
        }
    }
    Ok(values)
}

fn csv_writer(out: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn emit(buf: Vec<u8>, out: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, &buf).map_err(|e| CliError::Io(path.display().to_string(), e)),
        None => stdout
            .write_all(&buf)
            .and_then(|_| stdout.flush())
            .map_err(|e| CliError::Io("stdout".into(), e)),
    }
}

pub fn cmd_test(args: &TestArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let settings = TestSettings::new(args.b_reps, args.alpha).map_err(|e| usage(e.to_string()))?;
    if !args.mu0.is_finite() {
        return Err(usage("--mu0 must be finite"));
    }
    let path = args.input.display().to_string();
    let text = fs::read_to_string(&args.input).map_err(|e| CliError::Io(path.clone(), e))?;
    let values = parse_observations(&text, &path)?;
    if values.len() < 2 {
        return Err(usage(format!(
            "{path}: need at least 2 observations, found {}",
            values.len()
        )));
    }
    let sample = Sample::new(values)?;
    let outcome = run_test(
        args.method,
        &sample,
        args.mu0,
        settings,
        &mut RngStream::new(args.seed, 0),
    )?;
    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(TEST_HEADER)?;
        w.write_record([
            outcome.method.to_string(),
            sample.len().to_string(),
            sample.mean().to_string(),
            args.mu0.to_string(),
            outcome.p_value.to_string(),
            outcome.reject.to_string(),
        ])?;
        w.flush().map_err(|e| CliError::Io("csv".into(), e))?;
    }
    emit(buf, None, stdout)
}

fn population_spec(args: &PopulationArgs) -> Result<DistributionSpec, CliError> {
    let population = match args.dist {
        DistName::Gh => {
            let spec =
                DistributionSpec::gh(args.g.unwrap_or(0.0), args.h.unwrap_or(0.0)).map_err(|e| usage(e.to_string()))?;
            return Ok(spec);
        }
        DistName::Normal => Population::StandardNormal,
        DistName::Gamma22 => Population::NormalizedGamma22,
        DistName::Gamma22Mirror => Population::MirroredNormalizedGamma22,
        DistName::Bimodal => Population::NormalizedBimodal,
    };
    if args.g.is_some() || args.h.is_some() {
        return Err(usage("--g and --h only apply to --dist gh"));
    }
    Ok(DistributionSpec::new(population))
}

fn base_config(run: &RunArgs, n: usize) -> Result<ExperimentConfig, CliError> {
    let spec = population_spec(&run.population)?;
    let mode = match (run.mode, run.effect) {
        (ModeName::Validity, None) => Mode::Validity,
        (ModeName::Validity, Some(_)) => return Err(usage("--effect only applies to --mode power")),
        (ModeName::Power, effect) => Mode::Power {
            effect: effect.unwrap_or(0.0),
        },
    };
    let default_reps = match mode {
        Mode::Validity => DEFAULT_VALIDITY_REPS,
        Mode::Power { .. } => DEFAULT_POWER_REPS,
    };
    let settings = TestSettings::new(run.b_reps, run.alpha).map_err(|e| usage(e.to_string()))?;
    if run.threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    let config = ExperimentConfig::new(spec, n, mode, run.seed)
        .with_reps(run.reps.unwrap_or(default_reps))
        .with_settings(settings)
        .with_methods(&run.methods);
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

fn check_testable(config: &ExperimentConfig) -> Result<(), CliError> {
    config.mu0().map(|_| ()).map_err(|e| usage(e.to_string()))
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| usage(format!("cannot start {t} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn optional(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_result_rows<W: Write>(w: &mut csv::Writer<W>, result: &ExperimentResult) -> Result<(), CliError> {
    let cfg = &result.config;
    let gh = cfg.spec.gh_params();
    for m in &result.methods {
        w.write_record([
            cfg.spec.population.to_string(),
            optional(gh.map(|p| p.g())),
            optional(gh.map(|p| p.h())),
            cfg.mode.as_str().to_string(),
            cfg.mode.effect().to_string(),
            cfg.n.to_string(),
            m.method.to_string(),
            cfg.reps.to_string(),
            m.rejection_count.to_string(),
            m.rejection_rate.to_string(),
            m.mc_standard_error.to_string(),
            cfg.master_seed.to_string(),
        ])?;
    }
    Ok(())
}

fn report_degenerate(result: &ExperimentResult, stderr: &mut dyn Write) {
    for m in result.methods.iter().filter(|m| m.degenerate > 0) {
        let _ = writeln!(
            stderr,
            "warning: {} zero-variance replication(s) counted as non-rejections for {} (n = {})",
            m.degenerate, m.method, result.config.n
        );
    }
}

pub fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let config = base_config(&args.run, args.n)?;
    check_testable(&config)?;
    let result = in_pool(args.run.threads, || run_experiment(&config))??;
    report_degenerate(&result, stderr);
    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(SIMULATION_HEADER)?;
        write_result_rows(&mut w, &result)?;
        w.flush().map_err(|e| CliError::Io("csv".into(), e))?;
    }
    emit(buf, args.run.out.as_ref(), stdout)
}

pub fn cmd_grid(args: &GridArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let axis = match args.axis {
        AxisName::G => GridAxis::G,
        AxisName::H => GridAxis::H,
        AxisName::N => GridAxis::N,
    };
    let n = match (axis, args.n) {
        (GridAxis::N, None) => 2,
        (GridAxis::N, Some(_)) => return Err(usage("--n is set by the axis values when sweeping n")),
        (_, Some(n)) => n,
        (_, None) => return Err(usage("--n is required unless --axis n")),
    };
    if matches!(axis, GridAxis::G | GridAxis::H) && args.run.population.dist != DistName::Gh {
        return Err(usage("g and h sweeps need --dist gh"));
    }
    let mut values = args.values.clone();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(usage("axis values must be finite"));
    }
    values.sort_by(f64::total_cmp);
    let grid = GridSpec {
        axis,
        values,
        base: base_config(&args.run, n)?,
    };
    let cells = grid.cells().map_err(|e| usage(e.to_string()))?;
    for cfg in &cells {
        check_testable(cfg)?;
    }
    let results = in_pool(args.run.threads, || run_grid(&grid))??;
    let mut buf = Vec::new();
    let mut failed = 0;
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(SIMULATION_HEADER)?;
        for cell in &results {
            match &cell.result {
                Ok(r) => {
                    report_degenerate(r, stderr);
                    write_result_rows(&mut w, r)?;
                }
                Err(e) => {
                    failed += 1;
                    let _ = writeln!(stderr, "error: {} = {}: {e}", axis.as_str(), cell.value);
                }
            }
        }
        w.flush().map_err(|e| CliError::Io("csv".into(), e))?;
    }
    emit(buf, args.run.out.as_ref(), stdout)?;
    if failed > 0 {
        return Err(CliError::GridCells(failed));
    }
    Ok(())
}

pub fn cmd_dist(args: &DistArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = population_spec(&args.population)?;
    let mean = spec.population_mean()?;
    let sd = spec.std_dev()?;
    let skew = spec.skewness()?;
    let kurt = spec.kurtosis()?;
    let gh = spec.gh_params();
    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(DIST_HEADER)?;
        w.write_record([
            spec.population.to_string(),
            optional(gh.map(|p| p.g())),
            optional(gh.map(|p| p.h())),
            mean.to_string(),
            sd.to_string(),
            skew.to_string(),
            kurt.to_string(),
        ])?;
        w.flush().map_err(|e| CliError::Io("csv".into(), e))?;
    }
    emit(buf, None, stdout)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observations_skip_blank_lines() {
        let v = parse_observations("1.5\n\n  -2e-1 \r\n3\n", "x").unwrap();
        assert_eq!(v, vec![1.5, -0.2, 3.0]);
    }

    #[test]
    fn bad_line_is_named() {
        let err = parse_observations("1\n2\nabc\n", "data.txt").unwrap_err();
        assert_eq!(err.to_string(), "data.txt: line 3: not a number");
        assert!(parse_observations("1\nNaN\n", "d").is_err());
        assert!(parse_observations("1\ninf\n", "d").is_err());
    }

    #[test]
    fn g_and_h_flags_need_gh() {
        let args = PopulationArgs {
            dist: DistName::Normal,
            g: Some(0.1),
            h: None,
        };
        assert!(matches!(population_spec(&args), Err(CliError::Usage(_))));
    }
}
