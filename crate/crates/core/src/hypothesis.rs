//! One-sample tests of `H0: mu = mu0`.
//!
//! The Mirror bootstrap reflects the sample around `mu0`, giving a symmetric
//! population of `2n` values whose mean is `mu0`, and bootstraps size-`n`
//! resamples from it. The Shift bootstrap translates the sample so that its
//! mean is `mu0` and resamples from the `n` translated values. Both count the
//! resamples whose mean lies at least as far from `mu0` as the observed mean
//! and report that proportion as the p-value. The one-sample t-test is the
//! parametric baseline.
//!
//! Resampling works on deviations `x - mu0`: reflection is then exact
//! negation, and the statistic is the absolute deviation sum.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::TestError;
use crate::rng::RngStream;

/// The paper-protocol defaults: 1000 resamples, alpha 0.05.
pub const DEFAULT_B_REPS: usize = 1000;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Mirror,
    Shift,
    T,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Mirror, Method::Shift, Method::T];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Mirror => "mirror",
            Method::Shift => "shift",
            Method::T => "t",
        }
    }

    pub fn is_resampling(self) -> bool {
        !matches!(self, Method::T)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "mirror" => Ok(Method::Mirror),
            "shift" => Ok(Method::Shift),
            "t" => Ok(Method::T),
            other => Err(format!("unknown method `{other}` (expected mirror, shift or t)")),
        }
    }
}

/// At least two finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self, TestError> {
        if values.len() < 2 {
            return Err(TestError::TooFewObservations(values.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(TestError::NonFiniteValue(i));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Sample standard deviation with the `n - 1` denominator.
    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self.values.iter().map(|x| (x - m) * (x - m)).sum();
        (ss / (self.values.len() - 1) as f64).sqrt()
    }

    fn deviations(&self, mu0: f64) -> Vec<f64> {
        self.values.iter().map(|x| x - mu0).collect()
    }
}

/// The sample together with its reflection `2 mu0 - x`.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorPopulation {
    values: Vec<f64>,
    center: f64,
}

impl MirrorPopulation {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn center(&self) -> f64 {
        self.center
    }
}

pub fn mirror_population(sample: &Sample, mu0: f64) -> MirrorPopulation {
    let mut values = Vec::with_capacity(2 * sample.len());
    values.extend_from_slice(sample.values());
    values.extend(sample.values().iter().map(|x| 2.0 * mu0 - x));
    MirrorPopulation { values, center: mu0 }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestSettings {
    b_reps: usize,
    alpha: f64,
}

impl Default for TestSettings {
    fn default() -> Self {
        Self {
            b_reps: DEFAULT_B_REPS,
            alpha: DEFAULT_ALPHA,
        }
    }
}

impl TestSettings {
    pub fn new(b_reps: usize, alpha: f64) -> Result<Self, TestError> {
        if b_reps == 0 {
            return Err(TestError::InvalidResamples);
        }
        check_alpha(alpha)?;
        Ok(Self { b_reps, alpha })
    }

    pub fn b_reps(&self) -> usize {
        self.b_reps
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

fn check_alpha(alpha: f64) -> Result<(), TestError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(TestError::InvalidAlpha(alpha))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub method: Method,
    pub p_value: f64,
    pub reject: bool,
    /// `t` for the t-test, `|M - mu0|` for the resampling tests.
    pub statistic: f64,
    /// Resamples at least as extreme as the observed mean.
    pub extreme_count: Option<usize>,
}

/// Counts resamples of size `n` from `population` (already centered at
/// `mu0`) whose absolute sum reaches `observed`.
///
/// Sums that agree with `observed` up to accumulated rounding are ties and
/// count as extreme.
fn count_extreme(population: &[f64], n: usize, observed: f64, b_reps: usize, rng: &mut RngStream) -> usize {
    let max_abs = population.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let nf = n as f64;
    let tol = 4.0 * f64::EPSILON * nf * nf * max_abs;
    let threshold = observed.abs() - tol;
    let size = population.len();
    let mut extreme = 0;
    for _ in 0..b_reps {
        let mut sum = 0.0;
        for _ in 0..n {
            sum += population[rng.random_range(0..size)];
        }
        if sum.abs() >= threshold {
            extreme += 1;
        }
    }
    extreme
}

fn resampling_outcome(
    method: Method,
    sample: &Sample,
    mu0: f64,
    settings: TestSettings,
    extreme: usize,
) -> TestOutcome {
    let p_value = extreme as f64 / settings.b_reps as f64;
    TestOutcome {
        method,
        p_value,
        reject: p_value < settings.alpha,
        statistic: (sample.mean() - mu0).abs(),
        extreme_count: Some(extreme),
    }
}

/// Mirror bootstrap test: resample from the sample reflected around `mu0`.
pub fn mirror_bootstrap_test(
    sample: &Sample,
    mu0: f64,
    settings: TestSettings,
    rng: &mut RngStream,
) -> Result<TestOutcome, TestError> {
    if !mu0.is_finite() {
        return Err(TestError::NonFiniteMu0);
    }
    let dev = sample.deviations(mu0);
    let observed: f64 = dev.iter().sum();
    let mut population = Vec::with_capacity(2 * dev.len());
    population.extend_from_slice(&dev);
    population.extend(dev.iter().map(|d| -d));
    let extreme = count_extreme(&population, sample.len(), observed, settings.b_reps, rng);
    Ok(resampling_outcome(Method::Mirror, sample, mu0, settings, extreme))
}

/// Shift bootstrap test: resample from the sample translated to mean `mu0`.
pub fn shift_bootstrap_test(
    sample: &Sample,
    mu0: f64,
    settings: TestSettings,
    rng: &mut RngStream,
) -> Result<TestOutcome, TestError> {
    if !mu0.is_finite() {
        return Err(TestError::NonFiniteMu0);
    }
    let dev = sample.deviations(mu0);
    let observed: f64 = dev.iter().sum();
    let offset = observed / dev.len() as f64;
    let population: Vec<f64> = dev.iter().map(|d| d - offset).collect();
    let extreme = count_extreme(&population, sample.len(), observed, settings.b_reps, rng);
    Ok(resampling_outcome(Method::Shift, sample, mu0, settings, extreme))
}

/// Two-tailed one-sample t-test.
pub fn t_test(sample: &Sample, mu0: f64, alpha: f64) -> Result<TestOutcome, TestError> {
    if !mu0.is_finite() {
        return Err(TestError::NonFiniteMu0);
    }
    check_alpha(alpha)?;
    let dev = Sample {
        values: sample.deviations(mu0),
    };
    let s = dev.std_dev();
    if s == 0.0 || !s.is_finite() {
        return Err(TestError::DegenerateSample);
    }
    let n = dev.len();
    let t = dev.mean() / (s / (n as f64).sqrt());
    let p_value = (2.0 * student_t_cdf(-t.abs(), (n - 1) as u64)).min(1.0);
    Ok(TestOutcome {
        method: Method::T,
        p_value,
        reject: p_value < alpha,
        statistic: t,
        extreme_count: None,
    })
}

/// Student-t CDF with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: u64) -> f64 {
    assert!(df >= 1, "degrees of freedom must be positive");
    if t.is_nan() {
        return f64::NAN;
    }
    StudentsT::new(0.0, 1.0, df as f64)
        .expect("positive degrees of freedom")
        .cdf(t)
}

/// Runs `method` on `sample`; the t-test ignores `rng` and `b_reps`.
pub fn run_test(
    method: Method,
    sample: &Sample,
    mu0: f64,
    settings: TestSettings,
    rng: &mut RngStream,
) -> Result<TestOutcome, TestError> {
    match method {
        Method::Mirror => mirror_bootstrap_test(sample, mu0, settings, rng),
        Method::Shift => shift_bootstrap_test(sample, mu0, settings, rng),
        Method::T => t_test(sample, mu0, settings.alpha),
    }
}
