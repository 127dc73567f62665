//! Ramsey fringes of the bare qubit with a memory sideband on: the fringe
//! frequency moves by the sideband's Stark shift, which calibrates the
//! sideband amplitude.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{calibrate_sideband, fit_damped_cosine, shift_too_large, stark_shift, StarkCalibration};
use crate::dynamics::{collapse_operators, displaced_hamiltonian, evolve, EvolveOptions, PulseSequence, Tolerances};
use crate::hilbert::{embed, pauli, DensityMatrix, Pauli, SpaceLayout, QUBIT};
use crate::model::{DriveParams, Mode, SystemParams};
use crate::{hz_to_angular, Error, Result};

/// Extra sideband detuning of the decoupled variant, 5 MHz.
pub fn decoupling_offset() -> f64 {
    hz_to_angular(5e6)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RamseyConfig {
    pub params: SystemParams,
    /// Amplitude settings, in arbitrary instrument units.
    pub settings: Vec<f64>,
    /// True drive strength per unit setting (rad/us), which the
    /// calibration should recover.
    pub eps_scale: f64,
    /// Detuning of the sideband from the memory; the Rabi frequency by default.
    pub sideband_detuning: f64,
    /// Ramsey detuning added to the qubit so that zero shift still fringes.
    pub ramsey_detuning: f64,
    pub duration: f64,
    pub points: usize,
    pub memory_dim: usize,
    pub tol: Tolerances,
}

impl RamseyConfig {
    /// Settings 0.5..3.5 with 100 rad/us per unit; the top setting is close to
    /// `abar_m chi_m = kappa_r / 2`.
    pub fn device() -> Self {
        let params = SystemParams::device();
        RamseyConfig {
            sideband_detuning: params.omega_rabi,
            params,
            settings: vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5],
            eps_scale: 100.0,
            ramsey_detuning: hz_to_angular(1e6),
            duration: 4.0,
            points: 801,
            memory_dim: 4,
            tol: Tolerances::default(),
        }
    }

    /// The same drives pushed a further 5 MHz away from the mode.
    pub fn decoupled(&self) -> Self {
        RamseyConfig { sideband_detuning: self.params.omega_rabi + decoupling_offset(), ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.settings.is_empty() {
            return Err(Error::InvalidParams("at least one amplitude setting is required".into()));
        }
        if self.settings.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::InvalidParams("amplitude settings must be finite and non-negative".into()));
        }
        if !(self.duration > 0.0) || self.points < 16 {
            return Err(Error::InvalidParams("need a positive duration and at least 16 points".into()));
        }
        if !(self.sideband_detuning > 0.0) {
            return Err(Error::InvalidParams("sideband detuning must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RamseySample {
    pub setting: f64,
    pub eps: f64,
    /// Fringe frequency minus the Ramsey detuning (rad/us).
    pub shift: f64,
    /// Closed-form prediction for the same drive.
    pub predicted: f64,
    /// `2 chi (eps/Delta)^2`.
    pub approx: f64,
    /// Excluded from the calibration: fit failure or a shift beyond half
    /// the Rabi frequency.
    pub flagged: Option<String>,
}

#[derive(Clone, Debug)]
pub struct RamseyResult {
    pub samples: Vec<RamseySample>,
    /// Fringes (time, <sigma_x>) per setting.
    pub fringes: Vec<Vec<(f64, f64)>>,
    pub max_trace_drift: f64,
}

impl RamseyResult {
    /// `(setting, shift)` of the unflagged samples.
    pub fn usable(&self) -> Vec<(f64, f64)> {
        self.samples.iter().filter(|s| s.flagged.is_none()).map(|s| (s.setting, s.shift)).collect()
    }

    pub fn calibrate(&self, params: &SystemParams, detuning: f64) -> Result<StarkCalibration> {
        calibrate_sideband(&self.usable(), params.chi_m, detuning, params.kappa_m)
    }
}

fn ramsey_fringe(cfg: &RamseyConfig, params: &SystemParams, eps: f64) -> Result<(Vec<(f64, f64)>, f64)> {
    let mut drives = DriveParams::off(params);
    drives.detuning = cfg.sideband_detuning;
    drives.eps_m = C64::new(eps, 0.0);
    let seq = PulseSequence::constant(cfg.duration, drives.eps_m, C64::new(0.0, 0.0), 0.0)?;
    let mut h = displaced_hamiltonian(params, &drives, &seq)?;
    // The displaced frame assumes the Stark shift is compensated; put it back
    // along with the Ramsey detuning.
    let abar = drives.steady_amplitude(params, Mode::Memory);
    let sz = embed(&pauli(Pauli::Z), &params.layout, QUBIT)?;
    h.add_constant(sz.scale(params.chi_m * abar.norm_sqr() + 0.5 * cfg.ramsey_detuning))?;
    let dims = params.layout.dims();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = DensityMatrix::pure(
        SpaceLayout::single(2, "qubit")?,
        &nalgebra::DVector::from_vec(vec![C64::new(s, 0.0), C64::new(s, 0.0)]),
    )?;
    let m = DensityMatrix::fock_state(0, dims[1])?;
    let r = DensityMatrix::fock_state(0, dims[2])?;
    let rho0 = DensityMatrix::product(params.layout.clone(), &[&plus, &m, &r])?;
    let n = cfg.points;
    let times: Vec<f64> = (0..n).map(|k| cfg.duration * k as f64 / (n - 1) as f64).collect();
    let traj = evolve(&rho0, &h, &collapse_operators(params)?, &times, &EvolveOptions::with_tol(cfg.tol))?;
    let sx = traj.column("sigma_x").expect("standard observables");
    Ok((times.into_iter().zip(sx).collect(), traj.max_trace_drift))
}

pub fn run_driven_ramsey(cfg: &RamseyConfig) -> Result<RamseyResult> {
    cfg.validate()?;
    let layout = SpaceLayout::qubit_memory_readout(cfg.memory_dim, 2)?;
    let params = cfg.params.clone().with_layout(layout);
    let runs: Vec<Result<(RamseySample, Vec<(f64, f64)>, f64)>> = cfg
        .settings
        .par_iter()
        .map(|&setting| {
            let eps = cfg.eps_scale * setting;
            let (fringe, drift) = ramsey_fringe(cfg, &params, eps)?;
            let theory = stark_shift(params.chi_m, eps, cfg.sideband_detuning, params.kappa_m)?;
            let (t, x): (Vec<f64>, Vec<f64>) = fringe.iter().copied().unzip();
            let (shift, flagged) = match fit_damped_cosine(&t, &x) {
                Ok(fit) => {
                    let shift = fit.omega - cfg.ramsey_detuning;
                    let flag = shift_too_large(params.omega_rabi, shift)
                        .then(|| format!("shift {shift:.3} rad/us exceeds half the Rabi frequency"));
                    (shift, flag)
                }
                Err(e) => (f64::NAN, Some(format!("fringe fit failed: {e}"))),
            };
            let sample =
                RamseySample { setting, eps, shift, predicted: theory.exact, approx: theory.approx, flagged };
            Ok((sample, fringe, drift))
        })
        .collect();
    let mut samples = Vec::new();
    let mut fringes = Vec::new();
    let mut max_trace_drift: f64 = 0.0;
    for r in runs {
        let (s, f, d) = r?;
        samples.push(s);
        fringes.push(f);
        max_trace_drift = max_trace_drift.max(d);
    }
    Ok(RamseyResult { samples, fringes, max_trace_drift })
}
