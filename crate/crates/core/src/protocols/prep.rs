//! Thermal-state preparation by random displacements.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::hilbert::fock::poisson_weights;
use crate::{Error, Result};

/// Number of displacement samples used in the experiment.
pub const DEFAULT_SAMPLES: usize = 1500;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalPrep {
    pub nbar_target: f64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

impl ThermalPrep {
    pub fn new(nbar_target: f64, n_samples: usize, seed: u64) -> Self {
        ThermalPrep { nbar_target, n_samples, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nbar_target > 0.0) || !self.nbar_target.is_finite() {
            return Err(Error::InvalidParams(format!("nbar_target must be positive, got {}", self.nbar_target)));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidParams("n_samples must be positive".into()));
        }
        Ok(())
    }
}

/// Displacements with `|alpha|^2` exponentially distributed with mean
/// `nbar_target` and uniform phases, so that the mixture of displaced vacua
/// is thermal on average.
pub fn sample_thermal_displacements(prep: &ThermalPrep) -> Result<Vec<C64>> {
    prep.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(prep.seed);
    let exp = Exp::new(1.0 / prep.nbar_target).map_err(|e| Error::InvalidParams(e.to_string()))?;
    Ok((0..prep.n_samples)
        .map(|_| {
            let r2: f64 = exp.sample(&mut rng);
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            C64::from_polar(r2.sqrt(), phi)
        })
        .collect())
}

/// Kolmogorov-Smirnov distance between the empirical `|alpha|^2` and the
/// exponential law with mean `nbar`.
pub fn ks_statistic(alphas: &[C64], nbar: f64) -> f64 {
    let mut x: Vec<f64> = alphas.iter().map(|a| a.norm_sqr()).collect();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let cdf = 1.0 - (-v / nbar).exp();
            (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
        })
        .fold(0.0, f64::max)
}

/// KS critical value at 99% confidence.
pub fn ks_threshold(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Fock populations of the phase-averaged mixture of coherent states, with
/// Kahan summation over samples so the result does not depend on chunking.
pub fn mixture_populations(alphas: &[C64], dim: usize) -> Vec<f64> {
    let mut sum = vec![0.0; dim];
    let mut comp = vec![0.0; dim];
    for a in alphas {
        for (n, w) in poisson_weights(a.norm_sqr(), dim).into_iter().enumerate() {
            let y = w / alphas.len() as f64 - comp[n];
            let t = sum[n] + y;
            comp[n] = (t - sum[n]) - y;
            sum[n] = t;
        }
    }
    sum
}

/// Truncation holding every sample's Poisson distribution up to six standard
/// deviations.
pub fn mixture_dimension(alphas: &[C64]) -> usize {
    let max = alphas.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
    (max + 6.0 * max.sqrt() + 12.0).ceil() as usize
}
