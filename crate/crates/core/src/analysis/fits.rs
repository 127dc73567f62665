//! Cooling-curve, exponential and damped-cosine fits.

use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, LmFit, LmOptions, Model};
use super::report::ReportRow;
use crate::{Error, Result};

const FREE: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);
const POSITIVE: (f64, f64) = (1e-12, f64::INFINITY);
/// Photon numbers cannot be negative.
const NON_NEGATIVE: (f64, f64) = (0.0, f64::INFINITY);

fn check_series(times: &[f64], values: &[f64], min: usize) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: values.len() });
    }
    if times.len() < min {
        return Err(Error::InsufficientData(format!("{} points, need at least {min}", times.len())));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("times must be strictly increasing".into()));
    }
    if values.iter().chain(times).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("non-finite data".into()));
    }
    Ok(())
}

fn resolve_weights(weights: Option<&[f64]>, n: usize) -> Result<Vec<f64>> {
    match weights {
        None => Ok(vec![1.0; n]),
        Some(w) if w.len() != n => Err(Error::DimensionMismatch { expected: n, found: w.len() }),
        Some(w) if w.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) => {
            Err(Error::InvalidParams("weights must be finite and non-negative".into()))
        }
        Some(w) => Ok(w.to_vec()),
    }
}

/// Which linear branch the piecewise cooling model uses before `t0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PiecewiseForm {
    /// `A + B + B gamma (t0 - t)`: decreasing and C1-continuous at `t0`.
    #[default]
    Corrected,
    /// `A + B + B gamma (t - t0)`, which rises before `t0`; kept for comparison.
    Printed,
}

#[derive(Clone, Copy, Debug)]
struct Piecewise(PiecewiseForm);

impl Model for Piecewise {
    fn n_params(&self) -> usize {
        4
    }

    fn eval(&self, p: &[f64], t: f64, g: &mut [f64]) -> f64 {
        let (a, b, gamma, t0) = (p[0], p[1], p[2], p[3]);
        g[0] = 1.0;
        if t < t0 {
            let d = match self.0 {
                PiecewiseForm::Corrected => t0 - t,
                PiecewiseForm::Printed => t - t0,
            };
            let dd = match self.0 {
                PiecewiseForm::Corrected => 1.0,
                PiecewiseForm::Printed => -1.0,
            };
            g[1] = 1.0 + gamma * d;
            g[2] = b * d;
            g[3] = b * gamma * dd;
            a + b + b * gamma * d
        } else {
            let e = (-gamma * (t - t0)).exp();
            g[1] = e;
            g[2] = -b * (t - t0) * e;
            g[3] = b * gamma * e;
            a + b * e
        }
    }
}

/// Linear-then-exponential fit of a cooling curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiecewiseFit {
    pub form: PiecewiseForm,
    /// Asymptotic photon number.
    pub a: f64,
    /// Photons above the asymptote at `t0`.
    pub b: f64,
    /// Exponential rate after `t0` (1/us).
    pub gamma: f64,
    /// Crossover time (us).
    pub t0: f64,
    /// Over `(a, b, gamma, t0)`.
    pub covariance: [[f64; 4]; 4],
    pub residual_norm: f64,
}

impl PiecewiseFit {
    pub fn evaluate(&self, t: f64) -> f64 {
        let mut g = [0.0; 4];
        Piecewise(self.form).eval(&[self.a, self.b, self.gamma, self.t0], t, &mut g)
    }

    pub fn std_errors(&self) -> [f64; 4] {
        std::array::from_fn(|i| self.covariance[i][i].max(0.0).sqrt())
    }

    /// Largest cooling rate `B gamma` in photons/us (numerically the rate in MHz).
    pub fn max_rate(&self) -> f64 {
        self.b * self.gamma
    }

    pub fn max_rate_error(&self) -> f64 {
        let c = &self.covariance;
        let (b, g) = (self.b, self.gamma);
        (g * g * c[1][1] + b * b * c[2][2] + 2.0 * b * g * c[1][2]).max(0.0).sqrt()
    }

    pub fn report(&self, kappa: f64) -> Vec<ReportRow> {
        let e = self.std_errors();
        vec![
            ReportRow::new("A", self.a, e[0], "photons"),
            ReportRow::new("B", self.b, e[1], "photons"),
            ReportRow::new("gamma", self.gamma, e[2], "1/us"),
            ReportRow::new("t0", self.t0, e[3], "us"),
            ReportRow::new("max_rate", self.max_rate(), self.max_rate_error(), "photons/us"),
            ReportRow::new("max_rate", self.max_rate(), self.max_rate_error(), "MHz"),
            ReportRow::new("max_rate", self.max_rate() / kappa, self.max_rate_error() / kappa, "kappa"),
            ReportRow::new("residual_norm", self.residual_norm, 0.0, "photons"),
        ]
    }
}

fn linear_slope(ts: &[f64], ys: &[f64]) -> Option<f64> {
    if ts.len() < 2 {
        return None;
    }
    let n = ts.len() as f64;
    let (mt, my) = (ts.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
    let sxy: f64 = ts.iter().zip(ys).map(|(t, y)| (t - mt) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Index of the largest discrete second difference (in the direction that
/// makes the curve flatten out).
fn max_curvature_index(times: &[f64], values: &[f64]) -> usize {
    let mut best = (1, f64::NEG_INFINITY);
    for k in 1..times.len() - 1 {
        let s1 = (values[k] - values[k - 1]) / (times[k] - times[k - 1]);
        let s2 = (values[k + 1] - values[k]) / (times[k + 1] - times[k]);
        let c = (s2 - s1) / (times[k + 1] - times[k - 1]);
        if c > best.1 {
            best = (k, c);
        }
    }
    best.0
}

/// Fits the piecewise cooling model by Levenberg-Marquardt, starting from
/// several crossover candidates (including the point of largest curvature)
/// and keeping the best.
///
/// Errors with [`Error::DegenerateFit`] when the best crossover leaves fewer
/// than two points on either branch, or the exponential branch is
/// indistinguishable from a straight line over the data.
pub fn fit_piecewise_decay(
    times: &[f64],
    nbars: &[f64],
    weights: Option<&[f64]>,
    form: PiecewiseForm,
) -> Result<PiecewiseFit> {
    check_series(times, nbars, 8)?;
    let w = resolve_weights(weights, times.len())?;
    let n = times.len();
    let (t_first, t_last) = (times[0], times[n - 1]);
    let lo = nbars.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = nbars.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-12);
    let mut candidates: Vec<usize> = (2..n - 1).collect();
    if candidates.len() > 40 {
        let step = candidates.len() as f64 / 40.0;
        candidates = (0..40).map(|i| 2 + (i as f64 * step) as usize).collect();
    }
    candidates.push(max_curvature_index(times, nbars).clamp(2, n - 2));
    let model = Piecewise(form);
    let bounds = [NON_NEGATIVE, POSITIVE, POSITIVE, (t_first, t_last)];
    let mut best: Option<LmFit> = None;
    for k in candidates {
        let t0 = times[k];
        let a0 = lo;
        let b0 = (nbars[k] - a0).max(1e-3 * span);
        let slope = linear_slope(&times[..=k], &nbars[..=k]).unwrap_or(-span / (t_last - t_first));
        let slope = match form {
            PiecewiseForm::Corrected => -slope,
            PiecewiseForm::Printed => slope,
        };
        let tail_rate = 3.0 / (t_last - t0).max(1e-9);
        let g0 = if slope > 0.0 { slope / b0 } else { tail_rate };
        for g_init in [g0, tail_rate] {
            let fit = levenberg_marquardt(&model, times, nbars, &w, &[a0, b0, g_init, t0], &bounds, LmOptions::default());
            if let Ok(f) = fit {
                if best.as_ref().is_none_or(|b| f.chi2 < b.chi2) {
                    best = Some(f);
                }
            }
        }
    }
    let fit = best.ok_or_else(|| Error::FitFailure("no start converged".into()))?;
    let (a, b, gamma, t0) = (fit.params[0], fit.params[1], fit.params[2], fit.params[3]);
    let before = times.iter().filter(|&&t| t < t0).count();
    let after = n - before;
    if before < 2 || after < 2 {
        return Err(Error::DegenerateFit(format!(
            "crossover at t0 = {t0} leaves {before} linear and {after} exponential points; \
             fit a single exponential or a straight line instead"
        )));
    }
    if gamma * (t_last - t0) < 0.1 {
        return Err(Error::DegenerateFit(format!(
            "exponential branch (gamma = {gamma}) is indistinguishable from a line; fit a straight line instead"
        )));
    }
    let mut covariance = [[0.0; 4]; 4];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = fit.covariance[(i, j)];
        }
    }
    Ok(PiecewiseFit { form, a, b, gamma, t0, covariance, residual_norm: fit.chi2.sqrt() })
}

#[derive(Clone, Copy, Debug)]
struct Exponential {
    t_ref: f64,
}

impl Model for Exponential {
    fn n_params(&self) -> usize {
        3
    }
    fn eval(&self, p: &[f64], t: f64, g: &mut [f64]) -> f64 {
        let e = (-p[1] * (t - self.t_ref)).exp();
        g[0] = e;
        g[1] = -p[0] * (t - self.t_ref) * e;
        g[2] = 1.0;
        p[0] * e + p[2]
    }
}

/// `amplitude * exp(-rate (t - t_first)) + offset`, with the amplitude
/// referenced to the first sample time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentialFit {
    pub amplitude: f64,
    pub rate: f64,
    pub offset: f64,
    pub t_ref: f64,
    /// Over `(amplitude, rate, offset)`.
    pub covariance: [[f64; 3]; 3],
    /// False for a growing (negative-rate) or flat result.
    pub decaying: bool,
}

impl ExponentialFit {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.amplitude * (-self.rate * (t - self.t_ref)).exp() + self.offset
    }

    pub fn std_errors(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.covariance[i][i].max(0.0).sqrt())
    }

    /// `1 / rate` in us (infinite for a flat fit).
    pub fn time_constant(&self) -> f64 {
        1.0 / self.rate
    }

    pub fn report(&self) -> Vec<ReportRow> {
        let e = self.std_errors();
        vec![
            ReportRow::new("amplitude", self.amplitude, e[0], "value"),
            ReportRow::new("rate", self.rate, e[1], "1/us"),
            ReportRow::new("offset", self.offset, e[2], "value"),
            ReportRow::new("time_constant", self.time_constant(), e[1] / (self.rate * self.rate), "us"),
        ]
    }
}

/// Linear least-squares amplitude and offset at a fixed rate.
fn amplitude_offset_for_rate(times: &[f64], values: &[f64], rate: f64, t_ref: f64) -> (f64, f64) {
    let es: Vec<f64> = times.iter().map(|t| (-rate * (t - t_ref)).exp()).collect();
    let n = es.len() as f64;
    let (me, mv) = (es.iter().sum::<f64>() / n, values.iter().sum::<f64>() / n);
    let see: f64 = es.iter().map(|e| (e - me).powi(2)).sum();
    let sev: f64 = es.iter().zip(values).map(|(e, v)| (e - me) * (v - mv)).sum();
    let a = if see > 0.0 { sev / see } else { 0.0 };
    (a, mv - a * me)
}

/// Least-squares `A e^{-gamma t} + C`. Constant data gives amplitude and rate
/// zero; a negative rate is returned with `decaying = false`.
pub fn fit_exponential(times: &[f64], values: &[f64]) -> Result<ExponentialFit> {
    check_series(times, values, 4)?;
    let n = times.len();
    let t_ref = times[0];
    let mean = values.iter().sum::<f64>() / n as f64;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 1e-12 * mean.abs().max(1.0) {
        return Ok(ExponentialFit {
            amplitude: 0.0,
            rate: 0.0,
            offset: mean,
            t_ref,
            covariance: [[0.0; 3]; 3],
            decaying: false,
        });
    }
    let w = vec![1.0; n];
    let span_t = times[n - 1] - t_ref;
    let model = Exponential { t_ref };
    let last = values[n - 1];
    let rising = values[0] < last;
    let mut best: Option<LmFit> = None;
    for c0 in [last, if rising { hi } else { lo }, last - 0.5 * (values[0] - last)] {
        // Log-linear guess for the rate from the part above (or below) the offset.
        let pts: Vec<(f64, f64)> = times
            .iter()
            .zip(values)
            .map(|(&t, &v)| (t, (v - c0).abs()))
            .filter(|p| p.1 > 1e-3 * (hi - lo))
            .map(|(t, v)| (t, v.ln()))
            .collect();
        let (ts, ls): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let g0 = linear_slope(&ts, &ls).map(|s| -s).filter(|g| g.is_finite() && *g != 0.0).unwrap_or(1.0 / span_t);
        for g in [g0, 1.0 / span_t, -1.0 / span_t] {
            let (a0, c0) = amplitude_offset_for_rate(times, values, g, t_ref);
            if let Ok(f) = levenberg_marquardt(&model, times, values, &w, &[a0, g, c0], &[FREE, FREE, FREE], LmOptions::default()) {
                if best.as_ref().is_none_or(|b| f.chi2 < b.chi2) {
                    best = Some(f);
                }
            }
        }
    }
    let fit = best.ok_or_else(|| Error::FitFailure("exponential fit did not converge".into()))?;
    let mut covariance = [[0.0; 3]; 3];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = fit.covariance[(i, j)];
        }
    }
    let (amplitude, rate, offset) = (fit.params[0], fit.params[1], fit.params[2]);
    if rate <= 0.0 {
        log::warn!("exponential fit is not decaying (rate {rate})");
    }
    Ok(ExponentialFit { amplitude, rate, offset, t_ref, covariance, decaying: rate > 0.0 })
}

#[derive(Clone, Copy, Debug)]
struct DampedCosine {
    t_ref: f64,
}

impl Model for DampedCosine {
    fn n_params(&self) -> usize {
        5
    }
    // p = (amplitude, omega, phase, decay, offset)
    fn eval(&self, p: &[f64], t: f64, g: &mut [f64]) -> f64 {
        let s = t - self.t_ref;
        let e = (-p[3] * s).exp();
        let (sin, cos) = (p[1] * s + p[2]).sin_cos();
        g[0] = e * cos;
        g[1] = -p[0] * e * sin * s;
        g[2] = -p[0] * e * sin;
        g[3] = -p[0] * s * e * cos;
        g[4] = 1.0;
        p[0] * e * cos + p[4]
    }
}

/// `offset + amplitude e^{-decay s} cos(omega s + phase)` with `s = t - t_first`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DampedCosineFit {
    pub amplitude: f64,
    /// Angular frequency (rad/us).
    pub omega: f64,
    pub phase: f64,
    pub decay: f64,
    pub offset: f64,
    pub omega_error: f64,
    pub residual_norm: f64,
}

/// Dominant angular frequency of the mean-removed data from a zero-padded
/// periodogram scan up to the Nyquist frequency of the smallest spacing.
pub fn dominant_frequency(times: &[f64], values: &[f64]) -> f64 {
    let n = times.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let span = times[n - 1] - times[0];
    let dt = times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let (d_omega, max_omega) = (std::f64::consts::PI / (4.0 * span), std::f64::consts::PI / dt);
    let steps = ((max_omega / d_omega) as usize).clamp(8, 200_000);
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 1..=steps {
        let w = k as f64 * d_omega;
        let (mut re, mut im) = (0.0, 0.0);
        for (&t, &v) in times.iter().zip(values) {
            let (s, c) = (w * (t - times[0])).sin_cos();
            re += (v - mean) * c;
            im -= (v - mean) * s;
        }
        let p = re * re + im * im;
        if p > best.1 {
            best = (w, p);
        }
    }
    best.0
}

/// Fits a damped cosine, seeding the frequency from the periodogram peak.
pub fn fit_damped_cosine(times: &[f64], values: &[f64]) -> Result<DampedCosineFit> {
    check_series(times, values, 6)?;
    let n = times.len();
    let t_ref = times[0];
    let mean = values.iter().sum::<f64>() / n as f64;
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    if hi - lo <= 1e-12 * mean.abs().max(1.0) {
        return Err(Error::FitFailure("no oscillation in the data".into()));
    }
    let w0 = dominant_frequency(times, values);
    let (mut re, mut im) = (0.0, 0.0);
    for (&t, &v) in times.iter().zip(values) {
        let (s, c) = (w0 * (t - t_ref)).sin_cos();
        re += (v - mean) * c;
        im += (v - mean) * s;
    }
    let a0 = (2.0 / n as f64) * (re * re + im * im).sqrt();
    let phase0 = im.atan2(re) * -1.0;
    let w = vec![1.0; n];
    let model = DampedCosine { t_ref };
    let bounds = [(0.0, f64::INFINITY), (0.0, f64::INFINITY), FREE, (0.0, f64::INFINITY), FREE];
    let fit = levenberg_marquardt(&model, times, values, &w, &[a0.max(1e-6), w0, phase0, 0.0, mean], &bounds, LmOptions::default())?;
    let p = &fit.params;
    Ok(DampedCosineFit {
        amplitude: p[0],
        omega: p[1],
        phase: p[2],
        decay: p[3],
        offset: p[4],
        omega_error: fit.covariance[(1, 1)].max(0.0).sqrt(),
        residual_norm: fit.chi2.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn planted() -> (Vec<f64>, Vec<f64>, PiecewiseFit) {
        let truth = PiecewiseFit {
            form: PiecewiseForm::Corrected,
            a: 0.05,
            b: 5.0,
            gamma: 0.2,
            t0: 10.0,
            covariance: [[0.0; 4]; 4],
            residual_norm: 0.0,
        };
        let times: Vec<f64> = (0..60).map(|i| 0.5 * i as f64).collect();
        let values = times.iter().map(|&t| truth.evaluate(t)).collect();
        (times, values, truth)
    }

    #[test]
    fn recovers_planted_parameters() {
        let (t, y, truth) = planted();
        let fit = fit_piecewise_decay(&t, &y, None, PiecewiseForm::Corrected).unwrap();
        for (a, b) in [(fit.a, truth.a), (fit.b, truth.b), (fit.gamma, truth.gamma), (fit.t0, truth.t0)] {
            assert!((a - b).abs() < 1e-6, "{fit:?}");
        }
        assert!((fit.max_rate() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn noisy_fit_within_two_sigma() {
        let (t, y, truth) = planted();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noisy: Vec<f64> = y.iter().map(|v| v * (1.0 + 0.01 * rng.sample::<f64, _>(rand_distr::StandardNormal))).collect();
        let w: Vec<f64> = noisy.iter().map(|v| 1.0 / (0.01 * v).powi(2)).collect();
        let fit = fit_piecewise_decay(&t, &noisy, Some(&w), PiecewiseForm::Corrected).unwrap();
        let e = fit.std_errors();
        for (k, (a, b)) in [(fit.a, truth.a), (fit.b, truth.b), (fit.gamma, truth.gamma), (fit.t0, truth.t0)].into_iter().enumerate() {
            assert!((a - b).abs() < 2.0 * e[k], "param {k}: {a} vs {b} (sigma {})", e[k]);
        }
    }

    #[test]
    fn fitted_curve_is_monotone() {
        let (t, y, _) = planted();
        let fit = fit_piecewise_decay(&t, &y, None, PiecewiseForm::Corrected).unwrap();
        let v: Vec<f64> = t.iter().map(|&s| fit.evaluate(s)).collect();
        assert!(v.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn pure_exponential_is_degenerate() {
        let t: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|s| 0.1 + 3.0 * (-0.3 * s).exp()).collect();
        assert!(matches!(fit_piecewise_decay(&t, &y, None, PiecewiseForm::Corrected), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn pure_line_is_degenerate() {
        let t: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|s| 40.0 - s).collect();
        assert!(matches!(fit_piecewise_decay(&t, &y, None, PiecewiseForm::Corrected), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn printed_form_is_selectable() {
        let (t, y, _) = planted();
        let fit = fit_piecewise_decay(&t, &y, None, PiecewiseForm::Printed);
        // The rising branch cannot follow cooling data: either no crossover or a poor fit.
        if let Ok(f) = fit {
            assert!(f.residual_norm > 1e-3);
        }
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            fit_piecewise_decay(&[0.0, 1.0, 2.0], &[3.0, 2.0, 1.0], None, PiecewiseForm::Corrected),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn exponential_recovers_rate() {
        let t: Vec<f64> = (0..40).map(|i| 5.0 * i as f64).collect();
        let k = 1.0 / 170.0;
        let y: Vec<f64> = t.iter().map(|s| 2.0 * (-k * s).exp()).collect();
        let fit = fit_exponential(&t, &y).unwrap();
        assert!((fit.rate - k).abs() < 1e-3 * k, "{fit:?}");
        assert!(fit.decaying);
    }

    #[test]
    fn exponential_flat_data() {
        let fit = fit_exponential(&[0.0, 1.0, 2.0, 3.0], &[0.5; 4]).unwrap();
        assert_eq!((fit.amplitude, fit.rate, fit.offset), (0.0, 0.0, 0.5));
        assert!(!fit.decaying);
    }

    #[test]
    fn exponential_growth_is_flagged() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|s| (0.1 * s).exp()).collect();
        let fit = fit_exponential(&t, &y).unwrap();
        assert!(!fit.decaying && fit.rate < 0.0, "{fit:?}");
    }

    #[test]
    fn damped_cosine_frequency() {
        let t: Vec<f64> = (0..200).map(|i| 0.05 * i as f64).collect();
        let y: Vec<f64> = t.iter().map(|s| 0.5 + 0.4 * (-0.1 * s).exp() * (2.4 * s + 0.3).cos()).collect();
        let fit = fit_damped_cosine(&t, &y).unwrap();
        assert!((fit.omega - 2.4).abs() < 1e-8, "{fit:?}");
        assert!((fit.decay - 0.1).abs() < 1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn time_translation(shift in -50.0f64..50.0) {
            let (t, y, _) = planted();
            let base = fit_piecewise_decay(&t, &y, None, PiecewiseForm::Corrected).unwrap();
            let ts: Vec<f64> = t.iter().map(|s| s + shift).collect();
            let moved = fit_piecewise_decay(&ts, &y, None, PiecewiseForm::Corrected).unwrap();
            prop_assert!((moved.t0 - base.t0 - shift).abs() < 1e-9);
            prop_assert!((moved.a - base.a).abs() < 1e-9);
            prop_assert!((moved.b - base.b).abs() < 1e-9);
            prop_assert!((moved.gamma - base.gamma).abs() < 1e-9);
        }

        #[test]
        fn model_is_continuous_at_t0(a in -1.0f64..1.0, b in 0.01f64..10.0, g in 0.01f64..2.0, t0 in 0.0f64..20.0) {
            let f = PiecewiseFit { form: PiecewiseForm::Corrected, a, b, gamma: g, t0, covariance: [[0.0; 4]; 4], residual_norm: 0.0 };
            let left = f.evaluate(t0 - 1e-12);
            prop_assert!((left - f.evaluate(t0)).abs() < 1e-9);
            let mut v: Vec<f64> = (0..50).map(|i| f.evaluate(i as f64 * 0.8)).collect();
            v.dedup();
            prop_assert!(v.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}
