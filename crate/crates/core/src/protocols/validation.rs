//! Full driven model against the effective Jaynes-Cummings model, closed
//! system, from the same initial state.

use serde::Serialize;

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::dynamics::{effective_hamiltonian, evolve_pure, lab_hamiltonian, PulseSequence, Tolerances};
use crate::hilbert::SpaceLayout;
use crate::model::{lab_to_effective_unitary, DriveParams, SystemParams};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameValidationConfig {
    pub params: SystemParams,
    pub abar_m: f64,
    /// The Rabi frequency is set to this multiple of `chi_m`.
    pub rabi_over_chi: f64,
    /// Length in swap periods `pi / (chi_m abar_m)`.
    pub periods: f64,
    pub points: usize,
    pub memory_dim: usize,
    pub readout_dim: usize,
    pub tol: Tolerances,
}

impl FrameValidationConfig {
    pub fn new(abar_m: f64, rabi_over_chi: f64) -> Self {
        FrameValidationConfig {
            params: SystemParams::device(),
            abar_m,
            rabi_over_chi,
            periods: 1.0,
            points: 41,
            memory_dim: 20,
            readout_dim: 2,
            tol: Tolerances::with_rtol(1e-11),
        }
    }

    pub fn swap_period(&self) -> f64 {
        std::f64::consts::PI / (self.params.chi_m * self.abar_m)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FrameValidationResult {
    pub rabi_over_chi: f64,
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub min_fidelity: f64,
    pub max_trace_drift: f64,
    pub elapsed_seconds: f64,
}

/// Closed-system parameters: no mode loss, which also makes the classical
/// response exactly `abar e^{-i s Delta t}` from `t = 0`.
fn closed_params(cfg: &FrameValidationConfig) -> Result<SystemParams> {
    let layout = SpaceLayout::qubit_memory_readout(cfg.memory_dim, cfg.readout_dim)?;
    let mut p = cfg.params.clone().with_layout(layout);
    p.omega_rabi = cfg.rabi_over_chi * p.chi_m;
    p.kappa_m = 0.0;
    p.kappa_r = 0.0;
    Ok(p)
}

/// Both models are closed, so the comparison propagates state vectors; the
/// fidelity of pure states is `|<psi_lab|U^dag|psi_eff>|^2`.
pub fn run_frame_validation(cfg: &FrameValidationConfig) -> Result<FrameValidationResult> {
    if !(cfg.abar_m >= 0.0 && cfg.rabi_over_chi > 0.0 && cfg.periods > 0.0) || cfg.points < 2 {
        return Err(Error::InvalidParams("need abar_m >= 0, a positive Rabi ratio and duration".into()));
    }
    let clock = std::time::Instant::now();
    let params = closed_params(cfg)?;
    let drives = DriveParams::from_amplitudes(&params, C64::new(cfg.abar_m, 0.0), C64::new(0.0, 0.0));
    let duration = if cfg.abar_m > 0.0 { cfg.periods * cfg.swap_period() } else { 10.0 };
    let seq = PulseSequence::constant(duration, drives.eps_m, drives.eps_r, params.omega_rabi)?;
    let n = cfg.points;
    let times: Vec<f64> = (0..n).map(|k| duration * k as f64 / (n - 1) as f64).collect();
    let layout = params.layout.clone();
    let mut eff0 = DVector::zeros(layout.total_dim());
    eff0[layout.compose(&[1, 0, 0])] = C64::new(1.0, 0.0);
    let lab0 = lab_to_effective_unitary(&layout, &params, &drives, 0.0)?.adjoint() * &eff0;
    let (lab, eff) = rayon::join(
        || evolve_pure(&lab0, &lab_hamiltonian(&params, &drives, &seq)?, &times, cfg.tol),
        || evolve_pure(&eff0, &effective_hamiltonian(&params, &drives, &seq)?, &times, cfg.tol),
    );
    let ((lab, _), (eff, _)) = (lab?, eff?);
    let mut fidelity = Vec::with_capacity(n);
    let mut max_norm_drift: f64 = 0.0;
    for ((&t, l), e) in times.iter().zip(&lab).zip(&eff) {
        let mapped = lab_to_effective_unitary(&layout, &params, &drives, t)? * l;
        fidelity.push(mapped.dotc(e).norm_sqr());
        max_norm_drift = max_norm_drift.max((l.norm_squared() - 1.0).abs()).max((e.norm_squared() - 1.0).abs());
    }
    let min_fidelity = fidelity.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(FrameValidationResult {
        rabi_over_chi: cfg.rabi_over_chi,
        times,
        fidelity,
        min_fidelity,
        max_trace_drift: max_norm_drift,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_agrees() {
        let mut cfg = FrameValidationConfig::new(0.0, 400.0);
        cfg.memory_dim = 4;
        cfg.points = 5;
        cfg.periods = 0.1;
        let r = run_frame_validation(&cfg).unwrap();
        assert!(r.min_fidelity > 1.0 - 1e-6, "{}", r.min_fidelity);
    }

    #[test]
    fn small_ratio_is_worse() {
        let mut good = FrameValidationConfig::new(1.0, 400.0);
        good.memory_dim = 16;
        good.points = 11;
        let mut bad = good.clone();
        bad.rabi_over_chi = 10.0;
        let g = run_frame_validation(&good).unwrap();
        let b = run_frame_validation(&bad).unwrap();
        assert!(b.min_fidelity < g.min_fidelity, "{} vs {}", b.min_fidelity, g.min_fidelity);
    }
}
