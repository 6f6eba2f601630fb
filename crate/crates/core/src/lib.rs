//! Mirror bootstrap test for one population mean.
//!
//! The crate provides the Mirror bootstrap, the Shift bootstrap and the
//! one-sample t-test ([`hypothesis`]), the benchmark and g-and-h populations
//! they are evaluated on ([`distributions`]), and a reproducible parallel
//! harness that estimates Type I error rates and power ([`simulation`]).
//! The [`cli`] module backs the `mirrorboot` binary.

pub mod cli;
pub mod distributions;
pub mod error;
pub mod hypothesis;
pub mod quadrature;
pub mod rng;
pub mod simulation;

pub use distributions::{gh_transform, DistributionSpec, GhParams, Moment, Population};
pub use error::{DistributionError, QuadratureError, SimulationError, TestError};
pub use hypothesis::{
    mirror_bootstrap_test, mirror_population, run_test, shift_bootstrap_test, student_t_cdf, t_test, Method,
    MirrorPopulation, Sample, TestOutcome, TestSettings,
};
pub use rng::RngStream;
pub use simulation::{
    mc_standard_error, run_experiment, run_experiment_with, run_grid, ExperimentConfig, ExperimentResult, GridAxis,
    GridCell, GridSpec, MethodResult, Mode,
};
