//! Populations used by the validity and power experiments.
//!
//! Four benchmark populations are normalized to mean 0 and standard deviation
//! 1: the standard normal, a standardized Gamma(shape 2, scale 2), its
//! negation, and a standardized 50/50 mixture of N(-3, 1) and N(3, 1). The
//! Tukey g-and-h family covers skewed and heavy-tailed shapes; its moments
//! are computed by adaptive quadrature against the standard normal density.
//!
//! The gamma scale parameter cancels after standardization, so shape 2 with
//! scale 2 and shape 2 with rate 2 describe the same normalized population.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::DistributionError;
use crate::quadrature;
use crate::rng::RngStream;

const MEAN_ABS_TOL: f64 = 1e-8;
const MOMENT_ABS_TOL: f64 = 1e-10;
const MOMENT_REL_TOL: f64 = 1e-11;

/// Tukey g-and-h parameters: `g` controls skewness, `h` tail heaviness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhParams {
    g: f64,
    h: f64,
}

impl GhParams {
    pub fn new(g: f64, h: f64) -> Result<Self, DistributionError> {
        if !g.is_finite() || !h.is_finite() || h < 0.0 {
            return Err(DistributionError::InvalidParams { g, h });
        }
        Ok(Self { g, h })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Skewness exists only for h < 1/3.
    pub fn skewness_defined(&self) -> bool {
        self.h < 1.0 / 3.0
    }

    /// Kurtosis exists only for h < 1/4.
    pub fn kurtosis_defined(&self) -> bool {
        self.h < 0.25
    }
}

/// `((exp(g z) - 1) / g) * exp(h z^2 / 2)`, or `z * exp(h z^2 / 2)` when g = 0.
///
/// `expm1` keeps the g -> 0 limit continuous.
#[inline]
pub fn gh_transform(z: f64, params: GhParams) -> f64 {
    let tail = (0.5 * params.h * z * z).exp();
    if params.g == 0.0 {
        z * tail
    } else {
        (params.g * z).exp_m1() / params.g * tail
    }
}

/// A moment that may not exist for the population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Defined(f64),
    Undefined,
}

impl Moment {
    pub fn value(self) -> Option<f64> {
        match self {
            Moment::Defined(v) => Some(v),
            Moment::Undefined => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, Moment::Defined(_))
    }
}

impl fmt::Display for Moment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Moment::Defined(v) => write!(f, "{v}"),
            Moment::Undefined => f.write_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Population {
    StandardNormal,
    NormalizedGamma22,
    MirroredNormalizedGamma22,
    NormalizedBimodal,
    GandH(GhParams),
}

/// A sampleable population plus an additive location shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSpec {
    pub population: Population,
    pub shift: f64,
}

impl From<Population> for DistributionSpec {
    fn from(population: Population) -> Self {
        Self { population, shift: 0.0 }
    }
}

impl fmt::Display for Population {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Population::StandardNormal => f.write_str("normal"),
            Population::NormalizedGamma22 => f.write_str("gamma22"),
            Population::MirroredNormalizedGamma22 => f.write_str("gamma22-mirror"),
            Population::NormalizedBimodal => f.write_str("bimodal"),
            Population::GandH(_) => f.write_str("gh"),
        }
    }
}

enum Sampler {
    Normal,
    Gamma(Gamma<f64>, f64),
    Bimodal,
    GandH(GhParams),
}

const GAMMA_SHAPE: f64 = 2.0;
const GAMMA_SCALE: f64 = 2.0;

impl DistributionSpec {
    pub fn new(population: Population) -> Self {
        population.into()
    }

    pub fn gh(g: f64, h: f64) -> Result<Self, DistributionError> {
        Ok(Population::GandH(GhParams::new(g, h)?).into())
    }

    pub fn shifted(self, delta: f64) -> Self {
        Self {
            shift: self.shift + delta,
            ..self
        }
    }

    pub fn gh_params(&self) -> Option<GhParams> {
        match self.population {
            Population::GandH(p) => Some(p),
            _ => None,
        }
    }

    fn sampler(&self) -> Sampler {
        match self.population {
            Population::StandardNormal => Sampler::Normal,
            Population::NormalizedGamma22 | Population::MirroredNormalizedGamma22 => {
                let sign = if self.population == Population::NormalizedGamma22 {
                    1.0
                } else {
                    -1.0
                };
                let gamma = Gamma::new(GAMMA_SHAPE, GAMMA_SCALE).expect("constant gamma parameters");
                Sampler::Gamma(gamma, sign)
            }
            Population::NormalizedBimodal => Sampler::Bimodal,
            Population::GandH(p) => Sampler::GandH(p),
        }
    }

    /// Fills `out` with independent draws.
    pub fn fill(&self, out: &mut [f64], rng: &mut RngStream) -> Result<(), DistributionError> {
        if !self.shift.is_finite() {
            return Err(DistributionError::InvalidShift(self.shift));
        }
        let gamma_mean = GAMMA_SHAPE * GAMMA_SCALE;
        let gamma_sd = GAMMA_SHAPE.sqrt() * GAMMA_SCALE;
        let mixture_sd = 10f64.sqrt();
        let sampler = self.sampler();
        for x in out.iter_mut() {
            let raw = match &sampler {
                Sampler::Normal => rng.sample::<f64, _>(StandardNormal),
                Sampler::Gamma(gamma, sign) => sign * (gamma.sample(rng) - gamma_mean) / gamma_sd,
                Sampler::Bimodal => {
                    let center = if rng.random_bool(0.5) { 3.0 } else { -3.0 };
                    (center + rng.sample::<f64, _>(StandardNormal)) / mixture_sd
                }
                Sampler::GandH(p) => {
                    let v = gh_transform(rng.sample(StandardNormal), *p);
                    if !v.is_finite() {
                        return Err(DistributionError::NonFiniteDraw { g: p.g, h: p.h });
                    }
                    v
                }
            };
            *x = raw + self.shift;
        }
        Ok(())
    }

    /// Draws `n` independent observations.
    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Vec<f64>, DistributionError> {
        let mut out = vec![0.0; n];
        self.fill(&mut out, rng)?;
        Ok(out)
    }

    /// Population mean, including the shift. Exact for the benchmark
    /// populations, quadrature for g-and-h (which requires h < 1).
    pub fn population_mean(&self) -> Result<f64, DistributionError> {
        let base = match self.population {
            Population::GandH(p) => gh_mean(p)?,
            _ => 0.0,
        };
        Ok(base + self.shift)
    }

    /// Population standard deviation; undefined for g-and-h with h >= 1/2.
    pub fn std_dev(&self) -> Result<Moment, DistributionError> {
        match self.population {
            Population::GandH(p) => {
                if p.h >= 0.5 {
                    return Ok(Moment::Undefined);
                }
                let mean = gh_mean(p)?;
                Ok(Moment::Defined(gh_central_moment(p, mean, 2)?.sqrt()))
            }
            _ => Ok(Moment::Defined(1.0)),
        }
    }

    /// `mu_3 / mu_2^(3/2)` with central moments `mu_k`.
    pub fn skewness(&self) -> Result<Moment, DistributionError> {
        Ok(match self.population {
            Population::StandardNormal | Population::NormalizedBimodal => Moment::Defined(0.0),
            Population::NormalizedGamma22 => Moment::Defined(2.0 / GAMMA_SHAPE.sqrt()),
            Population::MirroredNormalizedGamma22 => Moment::Defined(-2.0 / GAMMA_SHAPE.sqrt()),
            Population::GandH(p) => {
                if !p.skewness_defined() {
                    Moment::Undefined
                } else if p.g == 0.0 {
                    Moment::Defined(0.0)
                } else {
                    let mean = gh_mean(p)?;
                    let m2 = gh_central_moment(p, mean, 2)?;
                    let m3 = gh_central_moment(p, mean, 3)?;
                    Moment::Defined(m3 / (m2 * m2 * m2).sqrt())
                }
            }
        })
    }

    /// `mu_4 / mu_2^2` (3 for the normal distribution, not excess kurtosis).
    pub fn kurtosis(&self) -> Result<Moment, DistributionError> {
        Ok(match self.population {
            Population::StandardNormal => Moment::Defined(3.0),
            Population::NormalizedGamma22 | Population::MirroredNormalizedGamma22 => {
                Moment::Defined(3.0 + 6.0 / GAMMA_SHAPE)
            }
            // E[Y^4] = 81 + 6*9 + 3 = 138 for Y ~ N(+-3, 1), over Var(Y)^2 = 100
            Population::NormalizedBimodal => Moment::Defined(1.38),
            Population::GandH(p) => {
                if !p.kurtosis_defined() {
                    Moment::Undefined
                } else {
                    let mean = gh_mean(p)?;
                    let m2 = gh_central_moment(p, mean, 2)?;
                    let m4 = gh_central_moment(p, mean, 4)?;
                    Moment::Defined(m4 / (m2 * m2))
                }
            }
        })
    }
}

fn gh_mean(p: GhParams) -> Result<f64, DistributionError> {
    if p.h >= 1.0 {
        return Err(DistributionError::MomentUndefined { moment: "mean", h: p.h });
    }
    if p.g == 0.0 {
        return Ok(0.0);
    }
    let f = |z: f64| centered_power_kernel(z, p, 0.0, 1);
    Ok(quadrature::integrate_real_line(f, MEAN_ABS_TOL, 0.0)?)
}

/// `E[(X - mean)^k]` for `X = gh_transform(Z)`; requires `h < 1 / k`.
fn gh_central_moment(p: GhParams, mean: f64, k: i32) -> Result<f64, DistributionError> {
    let f = |z: f64| centered_power_kernel(z, p, mean, k);
    Ok(quadrature::integrate_real_line(f, MOMENT_ABS_TOL, MOMENT_REL_TOL)?)
}

/// `(x(z) - mean)^k * phi(z)`, written as `[(x(z) - mean) * exp(-z^2 / 2k)]^k / sqrt(2 pi)`
/// with the bracket evaluated in log space so neither factor overflows in the tails.
fn centered_power_kernel(z: f64, p: GhParams, mean: f64, k: i32) -> f64 {
    let kf = f64::from(k);
    let damp = -0.5 * z * z / kf;
    let gz = p.g * z;
    let (sign, log_abs) = if p.g == 0.0 {
        (z.signum(), z.abs().ln())
    } else if gz > 700.0 {
        (p.g.signum(), gz - p.g.abs().ln())
    } else {
        let a = gz.exp_m1() / p.g;
        (a.signum(), a.abs().ln())
    };
    let lead = if log_abs == f64::NEG_INFINITY {
        0.0
    } else {
        sign * (log_abs + 0.5 * p.h * z * z + damp).exp()
    };
    let bracket = lead - mean * damp.exp();
    bracket.powi(k) / (2.0 * PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gh(g: f64, h: f64) -> GhParams {
        GhParams::new(g, h).unwrap()
    }

    /// Raw moment `E[X^k]` of a g-and-h variable with g != 0, from the
    /// binomial expansion of `(e^{gZ} - 1)^k` against the lognormal MGF.
    fn closed_form_raw_moment(g: f64, h: f64, k: i32) -> f64 {
        let kf = f64::from(k);
        let denom = 1.0 - kf * h;
        let mut binom = 1.0;
        let mut sum = 0.0;
        for i in 0..=k {
            if i > 0 {
                binom *= f64::from(k - i + 1) / f64::from(i);
            }
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let j = f64::from(k - i);
            sum += sign * binom * (j * j * g * g / (2.0 * denom)).exp();
        }
        sum / (g.powi(k) * denom.sqrt())
    }

    fn closed_form_central(g: f64, h: f64) -> (f64, f64, f64, f64) {
        let m1 = closed_form_raw_moment(g, h, 1);
        let m2 = closed_form_raw_moment(g, h, 2);
        let m3 = closed_form_raw_moment(g, h, 3);
        let m4 = closed_form_raw_moment(g, h, 4);
        let c2 = m2 - m1 * m1;
        let c3 = m3 - 3.0 * m1 * m2 + 2.0 * m1.powi(3);
        let c4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
        (m1, c2, c3, c4)
    }

    #[test]
    fn transform_values() {
        for &(g, h) in &[(0.0, 0.0), (0.5, 0.5), (1.0, 0.2), (0.0, 0.7)] {
            assert_eq!(gh_transform(0.0, gh(g, h)), 0.0);
        }
        assert_eq!(gh_transform(1.0, gh(0.0, 0.0)), 1.0);
        // 30-digit evaluation of ((e^0.5 - 1) / 0.5) * e^0.25
        let v = gh_transform(1.0, gh(0.5, 0.5));
        assert!((v - 1.665_949_199_849_866_4).abs() < 1e-14, "{v}");
    }

    #[test]
    fn transform_is_continuous_in_g() {
        for &z in &[-3.0, -0.5, 0.7, 2.5] {
            let limit = gh_transform(z, gh(0.0, 0.3));
            let mut prev = f64::INFINITY;
            for &g in &[1e-1, 1e-2, 1e-4, 1e-8] {
                let d = (gh_transform(z, gh(g, 0.3)) - limit).abs();
                assert!(d < prev, "not shrinking at z={z} g={g}");
                prev = d;
            }
            // first-order term is g z^2 / 2 * exp(h z^2 / 2)
            assert!(prev < 1e-6);
        }
    }

    #[test]
    fn transform_is_strictly_increasing() {
        for &(g, h) in &[(0.0, 0.0), (0.5, 0.5), (1.0, 0.0), (0.2, 1.0), (0.0, 0.4)] {
            let p = gh(g, h);
            let grid: Vec<f64> = (-800..=800).map(|i| f64::from(i) * 0.01).collect();
            for w in grid.windows(2) {
                assert!(gh_transform(w[1], p) > gh_transform(w[0], p), "g={g} h={h} z={}", w[0]);
            }
        }
    }

    #[test]
    fn params_reject_negative_h() {
        assert!(GhParams::new(0.1, -0.1).is_err());
        assert!(GhParams::new(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let specs = [
            DistributionSpec::new(Population::StandardNormal),
            DistributionSpec::new(Population::NormalizedGamma22),
            DistributionSpec::new(Population::NormalizedBimodal),
            DistributionSpec::gh(0.5, 0.5).unwrap(),
        ];
        for spec in specs {
            let a = spec.sample(5, &mut RngStream::new(99, 4)).unwrap();
            let b = spec.sample(5, &mut RngStream::new(99, 4)).unwrap();
            assert_eq!(
                a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
            );
        }
    }

    fn mean_sd(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v.sqrt())
    }

    #[test]
    fn benchmark_populations_are_standardized() {
        let n = 1_000_000;
        for (i, pop) in [
            Population::StandardNormal,
            Population::NormalizedGamma22,
            Population::MirroredNormalizedGamma22,
            Population::NormalizedBimodal,
        ]
        .into_iter()
        .enumerate()
        {
            let xs = DistributionSpec::new(pop)
                .sample(n, &mut RngStream::new(2024, i as u64))
                .unwrap();
            let (m, sd) = mean_sd(&xs);
            assert!(m.abs() < 4.0 / (n as f64).sqrt(), "{pop}: mean {m}");
            assert!((sd - 1.0).abs() < 0.01, "{pop}: sd {sd}");
        }
    }

    #[test]
    fn mirrored_gamma_is_negated_gamma() {
        let a = DistributionSpec::new(Population::NormalizedGamma22)
            .sample(100, &mut RngStream::new(5, 5))
            .unwrap();
        let b = DistributionSpec::new(Population::MirroredNormalizedGamma22)
            .sample(100, &mut RngStream::new(5, 5))
            .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn bimodal_modes_sit_near_plus_minus_three_over_root_ten() {
        let xs = DistributionSpec::new(Population::NormalizedBimodal)
            .sample(1_000_000, &mut RngStream::new(8, 0))
            .unwrap();
        let mode = 3.0 / 10f64.sqrt();
        let (pos, neg): (Vec<f64>, Vec<f64>) = xs.iter().partition(|&&x| x > 0.0);
        let (mp, _) = mean_sd(&pos);
        let (mn, _) = mean_sd(&neg);
        // truncating each component at 0 moves its mean by < 0.001
        assert!((mp - mode).abs() < 0.01, "{mp}");
        assert!((mn + mode).abs() < 0.01, "{mn}");
        let frac = pos.len() as f64 / xs.len() as f64;
        assert!((frac - 0.5).abs() < 0.005);
    }

    #[test]
    fn shift_moves_every_draw() {
        let base = DistributionSpec::new(Population::StandardNormal);
        let a = base.sample(10, &mut RngStream::new(1, 1)).unwrap();
        let b = base.shifted(0.75).sample(10, &mut RngStream::new(1, 1)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x + 0.75, *y);
        }
        assert_eq!(base.shifted(0.75).population_mean().unwrap(), 0.75);
    }

    #[test]
    fn symmetric_gh_sample_is_centered() {
        let n = 1_000_000;
        let xs = DistributionSpec::gh(0.0, 0.2)
            .unwrap()
            .sample(n, &mut RngStream::new(3, 3))
            .unwrap();
        let (m, sd) = mean_sd(&xs);
        assert!(m.abs() < 4.0 * sd / (n as f64).sqrt(), "mean {m}");
    }

    #[test]
    fn overflowing_draw_is_an_error() {
        let spec = DistributionSpec::gh(0.0, 400.0).unwrap();
        let err = spec.sample(10_000, &mut RngStream::new(1, 0)).unwrap_err();
        assert!(matches!(err, DistributionError::NonFiniteDraw { .. }));
    }

    #[test]
    fn benchmark_means_are_exact() {
        assert_eq!(
            DistributionSpec::new(Population::StandardNormal)
                .population_mean()
                .unwrap(),
            0.0
        );
        assert_eq!(DistributionSpec::gh(0.0, 0.2).unwrap().population_mean().unwrap(), 0.0);
    }

    #[test]
    fn gh_mean_matches_closed_form() {
        for &(g, h) in &[(0.5, 0.5), (0.2, 0.0), (1.0, 0.1), (0.8, 0.9), (0.1, 0.95)] {
            let q = DistributionSpec::gh(g, h).unwrap().population_mean().unwrap();
            let exact = closed_form_raw_moment(g, h, 1);
            assert!((q - exact).abs() < 1e-8, "g={g} h={h}: {q} vs {exact}");
        }
        let m = DistributionSpec::gh(0.5, 0.5).unwrap().population_mean().unwrap();
        assert!((m - 0.803_345_192_676_947_2).abs() < 1e-8);
    }

    #[test]
    fn gh_mean_needs_h_below_one() {
        let err = DistributionSpec::gh(0.5, 1.0).unwrap().population_mean().unwrap_err();
        assert!(matches!(err, DistributionError::MomentUndefined { .. }));
    }

    #[test]
    fn gh_higher_moments_match_closed_form() {
        for &(g, h) in &[(0.2, 0.0), (0.5, 0.1), (1.0, 0.0), (0.3, 0.2), (0.6, 0.24)] {
            let spec = DistributionSpec::gh(g, h).unwrap();
            let (_, c2, c3, c4) = closed_form_central(g, h);
            let sd = spec.std_dev().unwrap().value().unwrap();
            let skew = spec.skewness().unwrap().value().unwrap();
            let kurt = spec.kurtosis().unwrap().value().unwrap();
            let want_skew = c3 / c2.powf(1.5);
            let want_kurt = c4 / (c2 * c2);
            assert!((sd - c2.sqrt()).abs() < 1e-8 * c2.sqrt().max(1.0), "sd g={g} h={h}");
            assert!(
                (skew - want_skew).abs() < 1e-7 * want_skew.abs().max(1.0),
                "skew g={g} h={h}: {skew} vs {want_skew}"
            );
            assert!(
                (kurt - want_kurt).abs() < 1e-6 * want_kurt,
                "kurt g={g} h={h}: {kurt} vs {want_kurt}"
            );
        }
    }

    #[test]
    fn lognormal_skewness_for_h_zero() {
        // h = 0 is a shifted, scaled lognormal with sigma = g
        let g: f64 = 0.2;
        let w = (g * g).exp();
        let want = (w + 2.0) * (w - 1.0).sqrt();
        let got = DistributionSpec::gh(g, 0.0)
            .unwrap()
            .skewness()
            .unwrap()
            .value()
            .unwrap();
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn gh_skewness_matches_monte_carlo() {
        // 100 batches of 1e5 draws; standard error from the batch spread
        let spec = DistributionSpec::gh(0.2, 0.0).unwrap();
        let batches = 100;
        let per = 100_000;
        let mut est = Vec::with_capacity(batches);
        for b in 0..batches {
            let xs = spec.sample(per, &mut RngStream::new(77, b as u64)).unwrap();
            let n = xs.len() as f64;
            let m = xs.iter().sum::<f64>() / n;
            let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
            let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
            est.push(m3 / m2.powf(1.5));
        }
        let (mean, sd) = mean_sd(&est);
        let se = sd / (batches as f64).sqrt();
        let q = spec.skewness().unwrap().value().unwrap();
        assert!((mean - q).abs() < 3.0 * se, "mc {mean} +- {se}, quad {q}");
    }

    #[test]
    fn undefined_moment_boundaries() {
        let at = |h: f64| DistributionSpec::gh(0.5, h).unwrap();
        assert!(at(0.32).skewness().unwrap().is_defined());
        assert_eq!(at(1.0 / 3.0).skewness().unwrap(), Moment::Undefined);
        assert!(at(0.24).kurtosis().unwrap().is_defined());
        assert_eq!(at(0.25).kurtosis().unwrap(), Moment::Undefined);
        assert_eq!(at(0.5).std_dev().unwrap(), Moment::Undefined);
        assert_eq!(at(0.5).kurtosis().unwrap().to_string(), "undefined");
        assert_eq!(
            DistributionSpec::gh(0.0, 0.1).unwrap().skewness().unwrap(),
            Moment::Defined(0.0)
        );
    }

    #[test]
    fn benchmark_shape_moments() {
        let normal = DistributionSpec::new(Population::StandardNormal);
        assert_eq!(normal.kurtosis().unwrap(), Moment::Defined(3.0));
        assert_eq!(normal.skewness().unwrap(), Moment::Defined(0.0));
        let gamma = DistributionSpec::new(Population::NormalizedGamma22);
        assert!((gamma.skewness().unwrap().value().unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let gh0 = DistributionSpec::gh(0.0, 0.0).unwrap();
        assert!((gh0.kurtosis().unwrap().value().unwrap() - 3.0).abs() < 1e-9);
        assert!((gh0.std_dev().unwrap().value().unwrap() - 1.0).abs() < 1e-10);
    }
}
