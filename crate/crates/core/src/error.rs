use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("integrand produced a non-finite value")]
    NonFinite,
    #[error("quadrature did not converge (estimate {estimate}, error {error})")]
    NoConvergence { estimate: f64, error: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("invalid g-and-h parameters g = {g}, h = {h}")]
    InvalidParams { g: f64, h: f64 },
    #[error("shift must be finite, got {0}")]
    InvalidShift(f64),
    #[error("non-finite draw: parameters g = {g}, h = {h} are unusable for sampling")]
    NonFiniteDraw { g: f64, h: f64 },
    #[error("the {moment} is undefined for h = {h}")]
    MomentUndefined { moment: &'static str, h: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TestError {
    #[error("sample needs at least 2 observations, got {0}")]
    TooFewObservations(usize),
    #[error("sample value at index {0} is not finite")]
    NonFiniteValue(usize),
    #[error("hypothesized mean must be finite")]
    NonFiniteMu0,
    #[error("sample has zero variance")]
    DegenerateSample,
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("number of bootstrap resamples must be at least 1")]
    InvalidResamples,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Test(#[from] TestError),
}
