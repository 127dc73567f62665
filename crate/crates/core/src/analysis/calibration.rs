//! Stark-shift calibration of sideband amplitudes and the shifted Rabi
//! frequency.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::report::ReportRow;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StarkShift {
    /// `Re(8 chi eps^2 / (4 Omega^2 + (kappa - 2i chi)^2))`.
    pub exact: f64,
    /// `2 chi (eps / Omega)^2`.
    pub approx: f64,
    /// `|exact - approx| / |exact|` (zero when both vanish).
    pub relative_gap: f64,
}

fn stark_factor(chi: f64, omega: f64, kappa: f64) -> f64 {
    let den = C64::new(4.0 * omega * omega, 0.0) + C64::new(kappa, -2.0 * chi).powu(2);
    (C64::new(8.0 * chi, 0.0) / den).re
}

/// Qubit frequency shift from a mode drive of strength `eps` detuned by
/// `omega` from the mode. All arguments are angular rates.
pub fn stark_shift(chi: f64, eps: f64, omega: f64, kappa: f64) -> Result<StarkShift> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParams(format!("drive detuning must be positive, got {omega}")));
    }
    let exact = stark_factor(chi, omega, kappa) * eps * eps;
    let approx = 2.0 * chi * (eps / omega).powi(2);
    let relative_gap = if exact == 0.0 { 0.0 } else { ((exact - approx) / exact).abs() };
    Ok(StarkShift { exact, approx, relative_gap })
}

/// Drive strength per unit amplitude setting, from Stark-shift samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StarkCalibration {
    /// `(setting, measured shift)` as given, sorted by setting.
    pub samples: Vec<(f64, f64)>,
    /// Drive strength inferred from each sample.
    pub eps: Vec<f64>,
    /// Fitted `eps = scale * setting`.
    pub scale: f64,
    pub variance: f64,
}

impl StarkCalibration {
    pub fn std_error(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn report(&self) -> Vec<ReportRow> {
        vec![ReportRow::new("eps_scale", self.scale, self.std_error(), "rad/us per setting")]
    }
}

/// Inverts the exact Stark-shift formula per sample and fits a line through
/// the origin. Settings must be non-negative; shifts must not decrease as the
/// setting grows.
pub fn calibrate_sideband(samples: &[(f64, f64)], chi: f64, omega: f64, kappa: f64) -> Result<StarkCalibration> {
    if samples.len() < 3 {
        return Err(Error::InsufficientData(format!("{} amplitude settings, need at least 3", samples.len())));
    }
    if !(omega > 0.0) || !(chi > 0.0) {
        return Err(Error::InvalidParams("chi and the drive detuning must be positive".into()));
    }
    let mut sorted = samples.to_vec();
    if sorted.iter().any(|s| !s.0.is_finite() || !s.1.is_finite() || s.0 < 0.0) {
        return Err(Error::InvalidParams("settings must be finite and non-negative".into()));
    }
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale_shift = sorted.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
    let tol = 1e-9 * scale_shift;
    if sorted.windows(2).any(|w| w[1].1 < w[0].1 - tol) || sorted.iter().any(|s| s.1 < -tol) {
        return Err(Error::CalibrationFailure("shift does not grow monotonically with the drive amplitude".into()));
    }
    let factor = stark_factor(chi, omega, kappa);
    let eps: Vec<f64> = sorted.iter().map(|s| (s.1.max(0.0) / factor).sqrt()).collect();
    let sxx: f64 = sorted.iter().map(|s| s.0 * s.0).sum();
    if sxx == 0.0 {
        return Err(Error::CalibrationFailure("all amplitude settings are zero".into()));
    }
    let scale = sorted.iter().zip(&eps).map(|(s, e)| s.0 * e).sum::<f64>() / sxx;
    let rss: f64 = sorted.iter().zip(&eps).map(|(s, e)| (e - scale * s.0).powi(2)).sum();
    let variance = rss / (sorted.len() - 1) as f64 / sxx;
    Ok(StarkCalibration { samples: sorted, eps, scale, variance })
}

/// Rabi frequency of a drive detuned by `delta`: `sqrt(Omega_R^2 + delta^2)`.
pub fn shifted_rabi_frequency(omega_rabi: f64, delta: f64) -> f64 {
    omega_rabi.hypot(delta)
}

/// A detuning above half the Rabi frequency is too large for a reliable
/// shifted-frame calibration.
pub fn shift_too_large(omega_rabi: f64, delta: f64) -> bool {
    delta.abs() > 0.5 * omega_rabi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{angular_to_hz, hz_to_angular};

    #[test]
    fn zero_drive_zero_shift() {
        let s = stark_shift(0.1, 0.0, 50.0, 0.01).unwrap();
        assert_eq!((s.exact, s.approx, s.relative_gap), (0.0, 0.0, 0.0));
    }

    #[test]
    fn device_operating_point() {
        let chi = hz_to_angular(28.5e3);
        let omega = hz_to_angular(9e6);
        let s = stark_shift(chi, 6.70 * omega, omega, 1.0 / 170.0).unwrap();
        let mhz = angular_to_hz(s.exact) * 1e-6;
        assert!((mhz - 2.56).abs() < 0.01, "{mhz}");
        let doubled = stark_shift(chi, 2.0 * 6.70 * omega, omega, 1.0 / 170.0).unwrap();
        assert!((doubled.approx / s.approx - 4.0).abs() < 1e-12);
    }

    #[test]
    fn forms_agree_in_the_weak_limit() {
        let omega = 50.0;
        let mut last = f64::INFINITY;
        for k in 0..6 {
            let small = 0.5f64.powi(k);
            let gap = stark_shift(small, 10.0, omega, small).unwrap().relative_gap;
            assert!(gap < last || gap == 0.0);
            last = gap;
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn calibration_recovers_scale() {
        let (chi, omega, kappa, scale) = (0.18, 56.5, 0.006, 120.0);
        let samples: Vec<(f64, f64)> = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
            .iter()
            .map(|&s| (s, stark_shift(chi, scale * s, omega, kappa).unwrap().exact))
            .collect();
        assert_eq!(samples[0].1, 0.0);
        let cal = calibrate_sideband(&samples, chi, omega, kappa).unwrap();
        assert!((cal.scale - scale).abs() < 1e-9 * scale);
    }

    #[test]
    fn non_monotone_data_fails() {
        let samples = [(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)];
        assert!(matches!(calibrate_sideband(&samples, 0.1, 50.0, 0.0), Err(Error::CalibrationFailure(_))));
    }

    #[test]
    fn shifted_rabi() {
        let omega = hz_to_angular(9e6);
        assert_eq!(shifted_rabi_frequency(omega, 0.0), omega);
        let f = angular_to_hz(shifted_rabi_frequency(omega, hz_to_angular(2.6e6))) * 1e-6;
        assert!((f - 9.368).abs() < 5e-4, "{f}");
        let d = hz_to_angular(10.5e6);
        assert!((angular_to_hz(shifted_rabi_frequency(omega, d)) * 1e-6 - 13.83).abs() < 5e-3);
        assert!(shift_too_large(omega, d) && !shift_too_large(omega, hz_to_angular(2.6e6)));
    }
}
