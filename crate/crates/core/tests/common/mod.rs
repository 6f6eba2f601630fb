//! Exhaustive-enumeration oracle for the resampling tests.
//!
//! Enumerates every ordered resample of size n from the resampling
//! population, using the literal reflected values `2 mu0 - x` and plain
//! means, independent of the deviation-sum arithmetic in the library.

#![allow(dead_code)]

/// Fraction of all `pop.len()^n` ordered resamples whose mean is at least as
/// far from `mu0` as `observed_mean`.
pub fn exhaustive_p(pop: &[f64], n: usize, mu0: f64, observed_mean: f64) -> f64 {
    let k = pop.len();
    let total = k.pow(n as u32);
    let scale = pop.iter().map(|x| x.abs()).fold(mu0.abs(), f64::max).max(1.0);
    let target = (observed_mean - mu0).abs() - 1e-9 * scale;
    let mut idx = vec![0usize; n];
    let mut hits = 0usize;
    for _ in 0..total {
        let mean = idx.iter().map(|&i| pop[i]).sum::<f64>() / n as f64;
        if (mean - mu0).abs() >= target {
            hits += 1;
        }
        for digit in idx.iter_mut() {
            *digit += 1;
            if *digit < k {
                break;
            }
            *digit = 0;
        }
    }
    hits as f64 / total as f64
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn exhaustive_mirror_p(xs: &[f64], mu0: f64) -> f64 {
    let mut pop = xs.to_vec();
    pop.extend(xs.iter().map(|x| 2.0 * mu0 - x));
    exhaustive_p(&pop, xs.len(), mu0, mean(xs))
}

pub fn exhaustive_shift_p(xs: &[f64], mu0: f64) -> f64 {
    let m = mean(xs);
    let pop: Vec<f64> = xs.iter().map(|x| x + (mu0 - m)).collect();
    exhaustive_p(&pop, xs.len(), mu0, m)
}

pub fn binomial_se(p: f64, b: usize) -> f64 {
    (p * (1.0 - p) / b as f64).sqrt()
}
