//! Reset of a thermal memory state, observed by halting the hold and
//! reading the characteristic function after the unmapping sequence.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::prep::{mixture_dimension, mixture_populations, sample_thermal_displacements, ThermalPrep};
use crate::analysis::{fit_piecewise_decay, PiecewiseFit, PiecewiseForm};
use crate::dynamics::pulse::{rdr_sequence, DEFAULT_RAMP};
use crate::dynamics::{EvolveOptions, SectorLayout, SectorState, SequenceRunner, SimFrame, Tolerances, Trajectory};
use crate::hilbert::{SpaceLayout, MEMORY};
use crate::model::{DriveParams, SystemParams};
use crate::tomography::{
    characteristic_from_populations, extract_nbar, sample_axes_with, suggested_max_alpha, NbarEstimate,
    DEFAULT_POINTS, DEFAULT_THRESHOLD,
};
use crate::{Error, Result};

/// Start of the hold in [`rdr_sequence`]: sideband ramp then Rabi ramp.
pub const HOLD_START: f64 = 2.0 * DEFAULT_RAMP;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThermalResetConfig {
    pub params: SystemParams,
    pub prep: ThermalPrep,
    /// `chi_m |abar_m|` (rad/us).
    pub coupling_m: f64,
    /// `chi_r |abar_r|` (rad/us).
    pub coupling_r: f64,
    /// Longest hold (us).
    pub hold: f64,
    /// Hold times at which the sequence is halted for tomography.
    pub tomography_holds: Vec<f64>,
    pub readout_dim: usize,
    /// Memory truncation; chosen from the samples when absent.
    pub memory_dim: Option<usize>,
    pub tol: Tolerances,
    pub form: PiecewiseForm,
}

impl ThermalResetConfig {
    /// Device parameters with `abar_m chi_m = kappa/2` and `abar_r chi_r = kappa`,
    /// 80 us of hold sampled every 2 us.
    pub fn device(prep: ThermalPrep) -> Self {
        let params = SystemParams::device();
        let kappa = params.kappa_r;
        ThermalResetConfig {
            params,
            prep,
            coupling_m: 0.5 * kappa,
            coupling_r: kappa,
            hold: 80.0,
            tomography_holds: (0..=40).map(|k| 2.0 * k as f64).collect(),
            readout_dim: 5,
            memory_dim: None,
            tol: Tolerances::default(),
            form: PiecewiseForm::Corrected,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.prep.validate()?;
        if !(self.hold >= 0.0) {
            return Err(Error::InvalidParams(format!("hold must be >= 0, got {}", self.hold)));
        }
        if self.tomography_holds.iter().any(|&t| !(0.0..=self.hold).contains(&t)) {
            return Err(Error::InvalidParams("tomography holds must lie within [0, hold]".into()));
        }
        if self.tomography_holds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParams("tomography holds must be strictly increasing".into()));
        }
        if self.coupling_m < 0.0 || self.coupling_r < 0.0 {
            return Err(Error::InvalidParams("couplings must be non-negative".into()));
        }
        self.tol.validate()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TomographyPoint {
    pub hold: f64,
    pub estimate: NbarEstimate,
    /// `<a^dag a>` of the same state, for comparison with the estimate.
    pub exact_nbar: f64,
    pub vacuum_probability: f64,
}

#[derive(Clone, Debug)]
pub struct ThermalResetResult {
    /// Instantaneous observables during the run, effective frame.
    pub trajectory: Trajectory,
    pub tomography: Vec<TomographyPoint>,
    /// Piecewise fit to the tomography estimates, or the reason it failed.
    pub fit: std::result::Result<PiecewiseFit, String>,
    /// `nbar_0 e^{-kappa_m t}` plus bath for the same elapsed time, per hold.
    pub free_decay: Vec<(f64, f64)>,
    pub initial_nbar: f64,
    pub memory_dim: usize,
    /// Largest `|Tr rho - 1|` over every run.
    pub max_trace_drift: f64,
}

impl ThermalResetResult {
    pub fn final_nbar(&self) -> Option<f64> {
        self.tomography.last().map(|p| p.estimate.nbar)
    }
}

fn mean_photons(pops: &[f64]) -> f64 {
    pops.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
}

/// Tomography of a phase-averaged memory state from its populations.
/// The populations are renormalized first so that integrator trace drift
/// does not show up as `C(0) != 1`.
pub fn populations_nbar(pops: &[f64]) -> Result<NbarEstimate> {
    let total: f64 = pops.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidState(format!("populations sum to {total}")));
    }
    let pops: Vec<f64> = pops.iter().map(|p| p / total).collect();
    let pops = &pops[..];
    let radial = |r: f64| characteristic_from_populations(pops, C64::new(r, 0.0));
    let max_alpha = suggested_max_alpha(radial);
    let samples =
        sample_axes_with(|a| Ok(C64::new(characteristic_from_populations(pops, a), 0.0)), max_alpha, DEFAULT_POINTS)?;
    extract_nbar(&samples, DEFAULT_THRESHOLD)
}

pub fn run_thermal_reset(cfg: &ThermalResetConfig) -> Result<ThermalResetResult> {
    cfg.validate()?;
    let alphas = sample_thermal_displacements(&cfg.prep)?;
    let dim_m = cfg.memory_dim.unwrap_or_else(|| mixture_dimension(&alphas));
    let layout = SpaceLayout::qubit_memory_readout(dim_m, cfg.readout_dim)?;
    let params = cfg.params.clone().with_layout(layout.clone());
    let drives = DriveParams::from_couplings(&params, cfg.coupling_m, cfg.coupling_r);
    let sectors = Arc::new(SectorLayout::for_sidebands(layout.clone(), drives.sign_m, drives.sign_r)?);
    let mut readout = vec![0.0; cfg.readout_dim];
    readout[0] = 1.0;
    let memory = mixture_populations(&alphas, dim_m);
    let initial_nbar = mean_photons(&memory);
    // Bare |g> seen from the dressed frame: equal weight on |->, |+>. The
    // coherence between them lies outside the stored blocks.
    let state0 = SectorState::from_populations(sectors, &[vec![0.5, 0.5], memory, readout])?;

    let main_seq = rdr_sequence(&params, &drives, cfg.hold)?;
    let mut runner = SequenceRunner::new(params.clone(), drives.clone(), main_seq, SimFrame::Effective);
    runner.options = EvolveOptions { tol: cfg.tol, store_states: true, ..Default::default() };
    let halts: Vec<f64> = cfg.tomography_holds.iter().map(|h| HOLD_START + h).collect();
    let main = runner.run_sectors(&state0, 0.0, &halts)?;
    let mut drift = main.before_gate.max_trace_drift;
    if let Some(a) = &main.after_gate {
        drift = drift.max(a.max_trace_drift);
    }
    let stored: Vec<(f64, &SectorState)> = main.before_gate.times.iter().copied().zip(&main.states).collect();

    let points: Vec<Result<(TomographyPoint, f64)>> = cfg
        .tomography_holds
        .par_iter()
        .map(|&hold| {
            let t = HOLD_START + hold;
            let state = stored
                .iter()
                .find(|(s, _)| (s - t).abs() < 1e-12)
                .map(|(_, st)| *st)
                .ok_or_else(|| Error::InvalidState(format!("no stored state at t = {t}")))?;
            let seq = rdr_sequence(&params, &drives, hold)?;
            let end = seq.total_duration();
            let mut tail = SequenceRunner::new(params.clone(), drives.clone(), seq, SimFrame::Effective);
            tail.options = EvolveOptions { tol: cfg.tol, ..Default::default() };
            let run = tail.run_sectors(state, t, &[end])?;
            let mut d = run.before_gate.max_trace_drift;
            if let Some(a) = &run.after_gate {
                d = d.max(a.max_trace_drift);
            }
            let pops = run.final_state.reduced_populations(MEMORY)?;
            let estimate = populations_nbar(&pops)
                .map_err(|e| Error::InvalidState(format!("tomography at hold {hold} us: {e}")))?;
            Ok((TomographyPoint { hold, estimate, exact_nbar: mean_photons(&pops), vacuum_probability: pops[0] }, d))
        })
        .collect();
    let mut tomography = Vec::with_capacity(points.len());
    for p in points {
        let (point, d) = p?;
        drift = drift.max(d);
        tomography.push(point);
    }

    let times: Vec<f64> = tomography.iter().map(|p| p.hold).collect();
    let nbars: Vec<f64> = tomography.iter().map(|p| p.estimate.nbar).collect();
    let fit = fit_piecewise_decay(&times, &nbars, None, cfg.form).map_err(|e| e.to_string());
    let (km, nth) = (params.kappa_m, params.bath_nbar_m);
    // Tomography happens at the end of the sequence, not at the halt.
    let overhead = rdr_sequence(&params, &drives, 0.0)?.total_duration();
    let free_decay = times.iter().map(|&t| (t, nth + (initial_nbar - nth) * (-km * (t + overhead)).exp())).collect();
    Ok(ThermalResetResult {
        trajectory: main.before_gate,
        tomography,
        fit,
        free_decay,
        initial_nbar,
        memory_dim: dim_m,
        max_trace_drift: drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extracts_large_thermal_occupation() {
        let nbar: f64 = 30.0;
        let pops: Vec<f64> = (0..600).map(|n| (nbar / (nbar + 1.0)).powi(n) / (nbar + 1.0)).collect();
        let est = populations_nbar(&pops).unwrap();
        assert!((est.nbar - nbar).abs() < 0.02 * nbar, "{est:?}");
    }

    fn small(prep: ThermalPrep) -> ThermalResetConfig {
        let mut cfg = ThermalResetConfig::device(prep);
        cfg.hold = 12.0;
        cfg.tomography_holds = (0..=12).map(|k| k as f64).collect();
        cfg.readout_dim = 3;
        cfg
    }

    #[test]
    fn no_coupling_is_free_decay() {
        let mut cfg = small(ThermalPrep::new(1.0, 200, 1));
        cfg.coupling_m = 0.0;
        let r = run_thermal_reset(&cfg).unwrap();
        for (p, (_, free)) in r.tomography.iter().zip(&r.free_decay) {
            assert!((p.exact_nbar - free).abs() < 1e-6 * free.max(1.0), "{} vs {free}", p.exact_nbar);
        }
        assert!(r.max_trace_drift < 1e-8);
    }

    #[test]
    fn coupling_cools() {
        let cfg = small(ThermalPrep::new(2.0, 300, 2));
        let r = run_thermal_reset(&cfg).unwrap();
        let first = r.tomography.first().unwrap().exact_nbar;
        let last = r.tomography.last().unwrap().exact_nbar;
        assert!(last < 0.1 * first, "{first} -> {last}");
        for p in &r.tomography {
            assert!((p.estimate.nbar - p.exact_nbar).abs() < 0.02 * p.exact_nbar.max(0.5), "{p:?}");
        }
    }
}
