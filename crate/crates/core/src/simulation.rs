//! Replicated Type I error and power experiments.
//!
//! Replication `i` of grid cell `c` draws its sample from stream
//! `(seed, [c, 0], i)` and gives each resampling method its own stream
//! `(seed, [c, 1 + method], i)`. Every replication is therefore addressable
//! without generating the ones before it, and rejection counts are integers,
//! so results do not depend on thread count or scheduling.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::distributions::{DistributionSpec, Population};
use crate::error::{DistributionError, SimulationError, TestError};
use crate::hypothesis::{run_test, Method, Sample, TestSettings};
use crate::rng::RngStream;

pub const DEFAULT_VALIDITY_REPS: usize = 10_000;
pub const DEFAULT_POWER_REPS: usize = 1_000;

const SAMPLE_TAG: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Test the true population mean.
    Validity,
    /// Sample from the population shifted by `effect`, test the unshifted mean.
    Power { effect: f64 },
}

impl Mode {
    pub fn effect(&self) -> f64 {
        match self {
            Mode::Validity => 0.0,
            Mode::Power { effect } => *effect,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Validity => "validity",
            Mode::Power { .. } => "power",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub spec: DistributionSpec,
    pub n: usize,
    pub reps: usize,
    pub settings: TestSettings,
    pub methods: Vec<Method>,
    pub mode: Mode,
    pub master_seed: u64,
}

impl ExperimentConfig {
    /// Paper-protocol defaults: 10,000 replications for validity and 1,000
    /// for power, B = 1000, alpha = 0.05, all three methods.
    pub fn new(spec: DistributionSpec, n: usize, mode: Mode, master_seed: u64) -> Self {
        let reps = match mode {
            Mode::Validity => DEFAULT_VALIDITY_REPS,
            Mode::Power { .. } => DEFAULT_POWER_REPS,
        };
        Self {
            spec,
            n,
            reps,
            settings: TestSettings::default(),
            methods: Method::ALL.to_vec(),
            mode,
            master_seed,
        }
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_methods(mut self, methods: &[Method]) -> Self {
        self.methods = methods.to_vec();
        self
    }

    pub fn with_settings(mut self, settings: TestSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let invalid = |msg: String| Err(SimulationError::InvalidConfig(msg));
        if self.n < 2 {
            return invalid(format!("sample size must be at least 2, got {}", self.n));
        }
        if self.reps == 0 {
            return invalid("replication count must be at least 1".into());
        }
        if self.methods.is_empty() {
            return invalid("at least one method is required".into());
        }
        if !self.mode.effect().is_finite() {
            return invalid(format!("effect must be finite, got {}", self.mode.effect()));
        }
        if !self.spec.shift.is_finite() {
            return invalid(format!("shift must be finite, got {}", self.spec.shift));
        }
        Ok(())
    }

    /// The hypothesized mean under test.
    pub fn mu0(&self) -> Result<f64, DistributionError> {
        self.spec.population_mean()
    }

    /// The population replications are drawn from.
    pub fn sampling_spec(&self) -> DistributionSpec {
        self.spec.shifted(self.mode.effect())
    }

    fn sorted_methods(&self) -> Vec<Method> {
        let mut m = self.methods.clone();
        m.sort();
        m.dedup();
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub rejection_count: usize,
    pub rejection_rate: f64,
    pub mc_standard_error: f64,
    /// Replications where the method could not be evaluated (zero-variance
    /// sample); counted as non-rejections.
    pub degenerate: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub mu0: f64,
    pub methods: Vec<MethodResult>,
    pub elapsed: Duration,
}

impl ExperimentResult {
    pub fn method(&self, method: Method) -> Option<&MethodResult> {
        self.methods.iter().find(|m| m.method == method)
    }

    pub fn rate(&self, method: Method) -> f64 {
        self.method(method).map_or(f64::NAN, |m| m.rejection_rate)
    }

    pub fn se(&self, method: Method) -> f64 {
        self.method(method).map_or(f64::NAN, |m| m.mc_standard_error)
    }
}

pub fn mc_standard_error(rate: f64, reps: usize) -> f64 {
    (rate * (1.0 - rate) / reps as f64).sqrt()
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    rejections: [usize; 3],
    degenerate: [usize; 3],
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for k in 0..3 {
            self.rejections[k] += other.rejections[k];
            self.degenerate[k] += other.degenerate[k];
        }
        self
    }
}

fn slot(method: Method) -> usize {
    match method {
        Method::Mirror => 0,
        Method::Shift => 1,
        Method::T => 2,
    }
}

/// Runs the experiment on the current rayon pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, SimulationError> {
    run_cell(config, 0)
}

/// Like [`run_experiment`], but samples come from `draw` instead of the
/// configured population. `mu0` is still taken from the configuration.
pub fn run_experiment_with<F>(config: &ExperimentConfig, draw: F) -> Result<ExperimentResult, SimulationError>
where
    F: Fn(&mut RngStream, &mut [f64]) -> Result<(), DistributionError> + Sync,
{
    run_cell_with(config, 0, draw)
}

fn run_cell(config: &ExperimentConfig, cell: u64) -> Result<ExperimentResult, SimulationError> {
    let spec = config.sampling_spec();
    run_cell_with(config, cell, |rng, out| spec.fill(out, rng))
}

fn run_cell_with<F>(config: &ExperimentConfig, cell: u64, draw: F) -> Result<ExperimentResult, SimulationError>
where
    F: Fn(&mut RngStream, &mut [f64]) -> Result<(), DistributionError> + Sync,
{
    config.validate()?;
    let started = Instant::now();
    let mu0 = config.mu0()?;
    let methods = config.sorted_methods();
    let seed = config.master_seed;
    let n = config.n;
    let settings = config.settings;

    let replicate = |i: usize| -> Result<Tally, SimulationError> {
        let rep = i as u64;
        let mut values = vec![0.0; n];
        draw(&mut RngStream::keyed(seed, &[cell, SAMPLE_TAG], rep), &mut values)?;
        let sample = Sample::new(values)?;
        let mut tally = Tally::default();
        for &method in &methods {
            let k = slot(method);
            let mut rng = RngStream::keyed(seed, &[cell, 1 + k as u64], rep);
            match run_test(method, &sample, mu0, settings, &mut rng) {
                Ok(out) => tally.rejections[k] += usize::from(out.reject),
                Err(TestError::DegenerateSample) => tally.degenerate[k] += 1,
                Err(e) => return Err(e.into()),
            }
        }
        Ok(tally)
    };

    let tally = (0..config.reps)
        .into_par_iter()
        .map(replicate)
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;

    let methods = methods
        .into_iter()
        .map(|method| {
            let k = slot(method);
            let rate = tally.rejections[k] as f64 / config.reps as f64;
            MethodResult {
                method,
                rejection_count: tally.rejections[k],
                rejection_rate: rate,
                mc_standard_error: mc_standard_error(rate, config.reps),
                degenerate: tally.degenerate[k],
            }
        })
        .collect();

    Ok(ExperimentResult {
        config: config.clone(),
        mu0,
        methods,
        elapsed: started.elapsed(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAxis {
    /// g-and-h skewness sweep with h = 0.
    G,
    /// g-and-h tail sweep with g = 0.
    H,
    /// Sample-size sweep.
    N,
}

impl GridAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            GridAxis::G => "g",
            GridAxis::H => "h",
            GridAxis::N => "n",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axis: GridAxis,
    pub values: Vec<f64>,
    pub base: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct GridCell {
    pub index: usize,
    pub value: f64,
    pub result: Result<ExperimentResult, SimulationError>,
}

impl GridSpec {
    /// Checks the axis against the base configuration and returns one
    /// configuration per axis value.
    pub fn cells(&self) -> Result<Vec<ExperimentConfig>, SimulationError> {
        if self.values.is_empty() {
            return grid_err("axis needs at least one value".into());
        }
        let gh = self.base.spec.gh_params();
        match self.axis {
            GridAxis::G => match gh {
                Some(p) if p.h() == 0.0 => {}
                _ => return grid_err("a g sweep needs a g-and-h base population with h = 0".into()),
            },
            GridAxis::H => match gh {
                Some(p) if p.g() == 0.0 => {}
                _ => return grid_err("an h sweep needs a g-and-h base population with g = 0".into()),
            },
            GridAxis::N => {}
        }
        self.values
            .iter()
            .map(|&v| {
                let mut cfg = self.base.clone();
                match self.axis {
                    GridAxis::G => cfg.spec.population = Population::GandH(grid_params(v, 0.0)?),
                    GridAxis::H => {
                        if v < 0.0 {
                            return grid_err(format!("h must be non-negative, got {v}"));
                        }
                        cfg.spec.population = Population::GandH(grid_params(0.0, v)?)
                    }
                    GridAxis::N => {
                        if v.fract() != 0.0 || v < 2.0 || v > u32::MAX as f64 {
                            return grid_err(format!("sample sizes must be integers >= 2, got {v}"));
                        }
                        cfg.n = v as usize;
                    }
                }
                cfg.validate()?;
                Ok(cfg)
            })
            .collect()
    }
}

fn grid_err<T>(msg: String) -> Result<T, SimulationError> {
    Err(SimulationError::InvalidGrid(msg))
}

fn grid_params(g: f64, h: f64) -> Result<crate::distributions::GhParams, SimulationError> {
    crate::distributions::GhParams::new(g, h).map_err(|e| SimulationError::InvalidGrid(e.to_string()))
}

/// One experiment per axis value; cell `k` uses key `(seed, k)`. A failing
/// cell is reported in place and does not stop the others.
pub fn run_grid(grid: &GridSpec) -> Result<Vec<GridCell>, SimulationError> {
    let configs = grid.cells()?;
    Ok(configs
        .iter()
        .zip(&grid.values)
        .enumerate()
        .map(|(index, (cfg, &value))| GridCell {
            index,
            value,
            result: run_cell(cfg, index as u64),
        })
        .collect())
}
