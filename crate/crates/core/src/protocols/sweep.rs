//! Thermal reset repeated over memory sideband strengths.

use rayon::prelude::*;
use serde::Serialize;

use super::thermal::{run_thermal_reset, ThermalResetConfig, ThermalResetResult};
use crate::{Error, Result};

/// Memory couplings `chi_m abar_m` as fractions of `kappa_r`.
pub const DEFAULT_FRACTIONS: [f64; 5] = [0.125, 0.25, 0.5, 0.75, 1.0];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingSweepConfig {
    /// Everything except `coupling_m`, which each point overrides.
    pub base: ThermalResetConfig,
    pub fractions: Vec<f64>,
}

impl CouplingSweepConfig {
    pub fn new(base: ThermalResetConfig) -> Self {
        CouplingSweepConfig { base, fractions: DEFAULT_FRACTIONS.to_vec() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fractions.is_empty() {
            return Err(Error::InvalidParams("coupling sweep needs at least one point".into()));
        }
        if self.fractions.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
            return Err(Error::InvalidParams("coupling fractions must be finite and non-negative".into()));
        }
        self.base.validate()
    }

    pub fn point_config(&self, fraction: f64) -> ThermalResetConfig {
        let mut cfg = self.base.clone();
        cfg.coupling_m = fraction * cfg.params.kappa_r;
        cfg
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub fraction: f64,
    pub coupling_m: f64,
    /// `B gamma` of the piecewise fit, photons/us; NaN when the fit failed.
    pub max_rate: f64,
    pub max_rate_error: f64,
    pub final_nbar: f64,
    /// Effective-qubit `<sigma_z>` at the end of the hold.
    pub final_sigma_z: f64,
}

#[derive(Clone, Debug)]
pub struct CouplingSweepResult {
    pub points: Vec<SweepPoint>,
    pub runs: Vec<ThermalResetResult>,
    pub kappa: f64,
}

impl CouplingSweepResult {
    /// Index of the fastest point.
    pub fn peak(&self) -> Option<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.max_rate.is_finite())
            .max_by(|a, b| a.1.max_rate.total_cmp(&b.1.max_rate))
            .map(|(i, _)| i)
    }
}

fn summarize(fraction: f64, coupling_m: f64, run: &ThermalResetResult) -> SweepPoint {
    let (max_rate, max_rate_error) = match &run.fit {
        Ok(f) => (f.max_rate(), f.max_rate_error()),
        Err(_) => (f64::NAN, f64::NAN),
    };
    SweepPoint {
        fraction,
        coupling_m,
        max_rate,
        max_rate_error,
        final_nbar: run.final_nbar().unwrap_or(f64::NAN),
        final_sigma_z: run.trajectory.last("sigma_z").unwrap_or(f64::NAN),
    }
}

/// Points run in parallel; results keep the order of `fractions`.
pub fn run_coupling_sweep(cfg: &CouplingSweepConfig) -> Result<CouplingSweepResult> {
    cfg.validate()?;
    let runs: Vec<Result<ThermalResetResult>> =
        cfg.fractions.par_iter().map(|&f| run_thermal_reset(&cfg.point_config(f))).collect();
    let runs: Vec<ThermalResetResult> = runs.into_iter().collect::<Result<_>>()?;
    let points = cfg
        .fractions
        .iter()
        .zip(&runs)
        .map(|(&f, run)| summarize(f, f * cfg.base.params.kappa_r, run))
        .collect();
    Ok(CouplingSweepResult { points, runs, kappa: cfg.base.params.kappa_r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::ThermalPrep;

    #[test]
    fn empty_sweep_is_rejected() {
        let mut cfg = CouplingSweepConfig::new(ThermalResetConfig::device(ThermalPrep::new(1.0, 50, 1)));
        cfg.fractions.clear();
        assert!(run_coupling_sweep(&cfg).is_err());
    }

    #[test]
    fn points_follow_fraction_order() {
        let mut base = ThermalResetConfig::device(ThermalPrep::new(1.0, 100, 3));
        base.hold = 6.0;
        base.tomography_holds = (0..=6).map(|k| k as f64).collect();
        base.readout_dim = 3;
        let mut cfg = CouplingSweepConfig::new(base);
        cfg.fractions = vec![0.5, 0.0];
        let r = run_coupling_sweep(&cfg).unwrap();
        assert_eq!(r.points[0].fraction, 0.5);
        assert_eq!(r.points[1].coupling_m, 0.0);
        assert!(r.points[0].final_nbar < r.points[1].final_nbar);
    }
}
