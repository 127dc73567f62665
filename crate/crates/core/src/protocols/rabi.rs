//! Vacuum Rabi oscillations between the dressed qubit and the memory, and
//! the single-photon reset built on the same exchange.

use serde::Serialize;

use crate::analysis::{fit_damped_cosine, fit_exponential, DampedCosineFit, ExponentialFit};
use crate::dynamics::{
    dressed_collapse_operators, effective_hamiltonian, evolve, CollapseSet, EvolveOptions, PulseSequence,
    Tolerances, Trajectory,
};
use crate::hilbert::{DensityMatrix, SpaceLayout, MEMORY};
use crate::model::{DriveParams, SystemParams};
use crate::{hz_to_angular, Error, Result};

/// Memory coupling of the single-photon experiment, `chi_m abar_m / 2pi = 0.191 MHz`.
pub fn fock_coupling() -> f64 {
    hz_to_angular(0.191e6)
}

/// `|+>|0>|0>` in effective-frame coordinates.
fn excited_dressed(layout: &SpaceLayout) -> Result<DensityMatrix> {
    let dims = layout.dims();
    let q = DensityMatrix::fock_state(1, 2)?;
    let m = DensityMatrix::fock_state(0, dims[1])?;
    let r = DensityMatrix::fock_state(0, dims[2])?;
    DensityMatrix::product(layout.clone(), &[&q, &m, &r])
}

fn collapse(params: &SystemParams, closed: bool) -> Result<CollapseSet> {
    if closed {
        Ok(CollapseSet::new())
    } else {
        dressed_collapse_operators(params)
    }
}

/// Constant drives in the effective frame: Rabi on, memory sideband at
/// `coupling_m`, readout sideband at `coupling_r`.
fn run_constant(
    params: &SystemParams,
    coupling_m: f64,
    coupling_r: f64,
    rho0: &DensityMatrix,
    times: &[f64],
    closed: bool,
    tol: Tolerances,
) -> Result<Trajectory> {
    let drives = DriveParams::from_couplings(params, coupling_m, coupling_r);
    let duration = *times.last().ok_or_else(|| Error::InvalidParams("no sample times".into()))?;
    let seq = PulseSequence::constant(duration.max(1e-9), drives.eps_m, drives.eps_r, params.omega_rabi)?;
    let h = effective_hamiltonian(params, &drives, &seq)?;
    let opts = EvolveOptions { tol, store_states: true, ..Default::default() };
    evolve(rho0, &h, &collapse(params, closed)?, times, &opts)
}

fn sample_times(duration: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|k| duration * k as f64 / (n - 1) as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VacuumRabiConfig {
    pub params: SystemParams,
    pub abar_m: f64,
    /// Total drive duration (us); three periods when absent.
    pub duration: Option<f64>,
    pub points: usize,
    pub memory_dim: usize,
    pub closed: bool,
    pub tol: Tolerances,
}

impl VacuumRabiConfig {
    pub fn device(abar_m: f64) -> Self {
        VacuumRabiConfig {
            params: SystemParams::device(),
            abar_m,
            duration: None,
            points: 241,
            memory_dim: 6,
            closed: false,
            tol: Tolerances::default(),
        }
    }

    pub fn coupling(&self) -> f64 {
        self.params.chi_m * self.abar_m
    }

    /// `2 chi_m |abar_m|`, the expected oscillation frequency (rad/us).
    pub fn expected_frequency(&self) -> f64 {
        2.0 * self.coupling()
    }

    fn duration(&self) -> Result<f64> {
        match self.duration {
            Some(d) if d > 0.0 => Ok(d),
            Some(d) => Err(Error::InvalidParams(format!("duration must be positive, got {d}"))),
            None if self.abar_m > 0.0 => Ok(3.0 * std::f64::consts::TAU / self.expected_frequency()),
            None => Ok(10.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VacuumRabiResult {
    pub times: Vec<f64>,
    /// Population of the excited dressed state.
    pub excited: Vec<f64>,
    /// Mean memory photon number.
    pub nbar_m: Vec<f64>,
    /// `None` for a flat trace.
    pub fit: Option<DampedCosineFit>,
    pub expected_frequency: f64,
    pub max_trace_drift: f64,
    pub trajectory: Trajectory,
}

impl VacuumRabiResult {
    pub fn frequency(&self) -> Option<f64> {
        self.fit.as_ref().map(|f| f.omega)
    }

    pub fn relative_error(&self) -> Option<f64> {
        self.frequency().map(|w| (w - self.expected_frequency).abs() / self.expected_frequency)
    }
}

pub fn run_vacuum_rabi(cfg: &VacuumRabiConfig) -> Result<VacuumRabiResult> {
    if !(cfg.abar_m >= 0.0) {
        return Err(Error::InvalidParams(format!("abar_m must be >= 0, got {}", cfg.abar_m)));
    }
    let layout = SpaceLayout::qubit_memory_readout(cfg.memory_dim, 2)?;
    let params = cfg.params.clone().with_layout(layout.clone());
    let times = sample_times(cfg.duration()?, cfg.points);
    let traj = run_constant(&params, cfg.coupling(), 0.0, &excited_dressed(&layout)?, &times, cfg.closed, cfg.tol)?;
    let sz = traj.column("sigma_z").expect("standard observables");
    let excited: Vec<f64> = sz.iter().map(|z| 0.5 * (1.0 + z)).collect();
    let nbar_m = traj.column("nbar_m").expect("standard observables");
    let swing = excited.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - excited.iter().cloned().fold(f64::INFINITY, f64::min);
    let fit = if swing > 1e-6 { Some(fit_damped_cosine(&times, &excited)?) } else { None };
    Ok(VacuumRabiResult {
        times,
        excited,
        nbar_m,
        fit,
        expected_frequency: cfg.expected_frequency(),
        max_trace_drift: traj.max_trace_drift,
        trajectory: traj,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FockResetConfig {
    pub params: SystemParams,
    /// `chi_m abar_m` for both the swap and the reset (rad/us).
    pub coupling_m: f64,
    /// `chi_r abar_r` during the reset; `kappa_r / 2` by default.
    pub coupling_r: f64,
    /// Swap duration; `pi / (2 coupling_m)` when absent.
    pub swap_duration: Option<f64>,
    pub reset_duration: f64,
    pub points: usize,
    pub memory_dim: usize,
    pub readout_dim: usize,
    pub closed: bool,
    pub tol: Tolerances,
}

impl FockResetConfig {
    pub fn device() -> Self {
        let params = SystemParams::device();
        FockResetConfig {
            coupling_m: fock_coupling(),
            coupling_r: 0.5 * params.kappa_r,
            params,
            swap_duration: None,
            reset_duration: 8.0,
            points: 161,
            memory_dim: 5,
            readout_dim: 4,
            closed: false,
            tol: Tolerances::default(),
        }
    }

    pub fn swap_duration(&self) -> f64 {
        self.swap_duration.unwrap_or(std::f64::consts::FRAC_PI_2 / self.coupling_m)
    }
}

#[derive(Clone, Debug)]
pub struct FockResetResult {
    /// `<1|rho_m|1>` after the swap.
    pub prep_fidelity: f64,
    pub times: Vec<f64>,
    /// Memory vacuum probability during the reset, from its start.
    pub vacuum: Vec<f64>,
    /// Fit of `1 - P0`.
    pub fit: ExponentialFit,
    pub final_vacuum: f64,
    pub max_trace_drift: f64,
    pub reset: Trajectory,
}

impl FockResetResult {
    pub fn time_constant(&self) -> f64 {
        self.fit.time_constant()
    }
}

/// Population of `|1>` in the memory after the half swap, with the
/// readout sideband off.
fn swap_fidelity(state: &DensityMatrix) -> Result<f64> {
    Ok(state.partial_trace(MEMORY)?.populations().get(1).copied().unwrap_or(0.0))
}

pub fn run_fock_reset(cfg: &FockResetConfig) -> Result<FockResetResult> {
    if !(cfg.coupling_m > 0.0) {
        return Err(Error::InvalidParams("the swap needs a memory coupling".into()));
    }
    let layout = SpaceLayout::qubit_memory_readout(cfg.memory_dim, cfg.readout_dim)?;
    let params = cfg.params.clone().with_layout(layout.clone());
    if !params.validity(None).effective_model_valid {
        return Err(Error::InvalidParams("Rabi frequency too small for the effective model".into()));
    }
    let swap = cfg.swap_duration();
    let prep = run_constant(&params, cfg.coupling_m, 0.0, &excited_dressed(&layout)?, &[0.0, swap], cfg.closed, cfg.tol)?;
    let prepared = prep.final_state.clone().expect("evolve sets the final state");
    let prep_fidelity = swap_fidelity(&prepared)?;
    if prep_fidelity < 0.5 {
        return Err(Error::Preparation(format!(
            "Fock-1 preparation fidelity {prep_fidelity:.3} < 0.5; check the swap duration {swap} us"
        )));
    }
    let times = sample_times(cfg.reset_duration, cfg.points);
    let reset = run_constant(&params, cfg.coupling_m, cfg.coupling_r, &prepared, &times, cfg.closed, cfg.tol)?;
    let vacuum: Vec<f64> = reset
        .states
        .iter()
        .map(|s| s.partial_trace(MEMORY).map(|m| m.populations()[0]))
        .collect::<Result<_>>()?;
    let excess: Vec<f64> = vacuum.iter().map(|p| 1.0 - p).collect();
    let fit = fit_exponential(&times, &excess)?;
    Ok(FockResetResult {
        prep_fidelity,
        final_vacuum: *vacuum.last().unwrap(),
        times,
        vacuum,
        fit,
        max_trace_drift: prep.max_trace_drift.max(reset.max_trace_drift),
        reset,
    })
}

/// Swap followed by the reverse swap; returns the fidelity with the start.
pub fn swap_round_trip(params: &SystemParams, coupling_m: f64, memory_dim: usize) -> Result<f64> {
    let layout = SpaceLayout::qubit_memory_readout(memory_dim, 2)?;
    let params = params.clone().with_layout(layout.clone());
    let rho0 = excited_dressed(&layout)?;
    let half = std::f64::consts::FRAC_PI_2 / coupling_m;
    let tol = Tolerances::with_rtol(1e-10);
    let fwd = run_constant(&params, coupling_m, 0.0, &rho0, &[0.0, half], true, tol)?;
    let back = run_constant(&params, -coupling_m, 0.0, fwd.final_state.as_ref().unwrap(), &[0.0, half], true, tol)?;
    back.final_state.unwrap().fidelity(&rho0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_is_flat() {
        let mut cfg = VacuumRabiConfig::device(0.0);
        cfg.points = 21;
        cfg.closed = true;
        let r = run_vacuum_rabi(&cfg).unwrap();
        assert!(r.fit.is_none());
        assert!(r.nbar_m.iter().all(|n| n.abs() < 1e-12));
    }

    #[test]
    fn frequency_is_twice_the_coupling() {
        let cfg = VacuumRabiConfig::device(5.0);
        let r = run_vacuum_rabi(&cfg).unwrap();
        assert!(r.relative_error().unwrap() < 0.01, "{:?} vs {}", r.frequency(), r.expected_frequency);
    }

    #[test]
    fn device_swap_period() {
        // chi_m abar_m / 2pi = 0.191 MHz: period 2.62 us, half swap 1.31 us.
        let g = fock_coupling();
        let period = std::f64::consts::TAU / (2.0 * g);
        assert!((period - 2.618).abs() < 1e-3, "{period}");
        let cfg = FockResetConfig::device();
        assert!((cfg.swap_duration() - 1.309).abs() < 1e-3);
    }

    #[test]
    fn closed_swap_prepares_fock_one() {
        let mut cfg = FockResetConfig::device();
        cfg.closed = true;
        cfg.reset_duration = 1.0;
        cfg.points = 11;
        let r = run_fock_reset(&cfg).unwrap();
        assert!(r.prep_fidelity > 0.99, "{}", r.prep_fidelity);
    }

    #[test]
    fn round_trip_returns_start() {
        let f = swap_round_trip(&SystemParams::device(), fock_coupling(), 4).unwrap();
        assert!(f > 0.99, "{f}");
    }

    #[test]
    fn wrong_swap_is_flagged() {
        let mut cfg = FockResetConfig::device();
        cfg.swap_duration = Some(2.0 * cfg.swap_duration());
        cfg.closed = true;
        assert!(matches!(run_fock_reset(&cfg), Err(Error::Preparation(_))));
    }
}
