//! Run configuration: TOML with physical values in Hz and seconds.
//!
//! Frequencies are `value / 2pi` in Hz, as quoted for the device. They are
//! converted to the engine's rad/us and us once, in [`RunConfig::resolve`].

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use rdr_core::dynamics::Tolerances;
use rdr_core::model::{DriveParams, Mode, SystemParams};
use rdr_core::protocols::{
    CouplingSweepConfig, Experiment, ExperimentSpec, FockResetConfig, FrameValidationConfig, RamseyConfig,
    ThermalPrep, ThermalResetConfig, VacuumRabiConfig,
};
use rdr_core::{hz_to_angular, C64};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Seconds to microseconds.
fn us(seconds: f64) -> f64 {
    seconds * 1e6
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ThermalReset,
    FockReset,
    VacuumRabi,
    DrivenRamsey,
    CouplingSweep,
    FrameValidation,
}

impl ExperimentKind {
    fn needs_drives(self) -> bool {
        !matches!(self, ExperimentKind::DrivenRamsey | ExperimentKind::FockReset)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    /// `chi_m / 2pi`, half the memory dispersive shift.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_m_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_r_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_r_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_lifetime_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_echo_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anharmonicity_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath_nbar_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath_nbar_r: Option<f64>,
}

impl ParamsConfig {
    /// Device defaults with the given overrides.
    pub fn resolve(&self) -> Result<SystemParams> {
        let mut p = SystemParams::device();
        let hz = |v: Option<f64>, dst: &mut f64| {
            if let Some(v) = v {
                *dst = hz_to_angular(v);
            }
        };
        hz(self.chi_m_hz, &mut p.chi_m);
        hz(self.chi_r_hz, &mut p.chi_r);
        hz(self.kappa_r_hz, &mut p.kappa_r);
        hz(self.rabi_hz, &mut p.omega_rabi);
        if let Some(t) = self.memory_lifetime_s {
            p.kappa_m = 1.0 / us(t);
        }
        if let Some(t) = self.t1_s {
            p.t1_q = us(t);
        }
        if let Some(t) = self.t2_echo_s {
            p.t2_echo_q = us(t);
        }
        if let Some(a) = self.anharmonicity_hz {
            p.anharmonicity = Some(hz_to_angular(a));
        }
        if let Some(n) = self.bath_nbar_m {
            p.bath_nbar_m = n;
        }
        if let Some(n) = self.bath_nbar_r {
            p.bath_nbar_r = n;
        }
        p.validate().context("params")?;
        Ok(p)
    }
}

/// Sideband settings. The memory entry is a list (a sweep axis); exactly
/// one of its three forms is allowed, and at most one readout form.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivesConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abar_m: Option<Vec<f64>>,
    /// `abar_m chi_m / kappa_r`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abar_m_over_kappa_chi: Option<Vec<f64>>,
    /// Raw drive strength `eps_m / 2pi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_m_hz: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abar_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abar_r_over_kappa_chi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_r_hz: Option<f64>,
}

fn amplitude_from_eps(p: &SystemParams, mode: Mode, eps_hz: f64) -> f64 {
    let mut d = DriveParams::off(p);
    match mode {
        Mode::Memory => d.eps_m = C64::new(hz_to_angular(eps_hz), 0.0),
        Mode::Readout => d.eps_r = C64::new(hz_to_angular(eps_hz), 0.0),
    }
    d.steady_amplitude(p, mode).norm()
}

impl DrivesConfig {
    pub fn validate(&self) -> Result<()> {
        let m = [self.abar_m.is_some(), self.abar_m_over_kappa_chi.is_some(), self.eps_m_hz.is_some()];
        match m.iter().filter(|x| **x).count() {
            0 => bail!("drives: one of abar_m, abar_m_over_kappa_chi, eps_m_hz is required"),
            1 => {}
            _ => bail!("drives: abar_m, abar_m_over_kappa_chi and eps_m_hz are mutually exclusive"),
        }
        let r = [self.abar_r.is_some(), self.abar_r_over_kappa_chi.is_some(), self.eps_r_hz.is_some()];
        if r.iter().filter(|x| **x).count() > 1 {
            bail!("drives: abar_r, abar_r_over_kappa_chi and eps_r_hz are mutually exclusive");
        }
        let list = self.abar_m.as_ref().or(self.abar_m_over_kappa_chi.as_ref()).or(self.eps_m_hz.as_ref());
        let list = list.expect("checked above");
        if list.is_empty() {
            bail!("drives: the memory drive list is empty");
        }
        let all = list.iter().chain(&self.abar_r).chain(&self.abar_r_over_kappa_chi).chain(&self.eps_r_hz);
        if all.into_iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            bail!("drives: values must be finite and non-negative");
        }
        Ok(())
    }

    /// Memory amplitudes `|abar_m|`, one per sweep point.
    pub fn memory_amplitudes(&self, p: &SystemParams) -> Vec<f64> {
        if let Some(a) = &self.abar_m {
            a.clone()
        } else if let Some(f) = &self.abar_m_over_kappa_chi {
            f.iter().map(|f| f * p.kappa_r / p.chi_m).collect()
        } else {
            let eps = self.eps_m_hz.as_deref().unwrap_or_default();
            eps.iter().map(|&e| amplitude_from_eps(p, Mode::Memory, e)).collect()
        }
    }

    pub fn readout_amplitude(&self, p: &SystemParams) -> Option<f64> {
        self.abar_r
            .or(self.abar_r_over_kappa_chi.map(|f| f * p.kappa_r / p.chi_r))
            .or(self.eps_r_hz.map(|e| amplitude_from_eps(p, Mode::Readout, e)))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

/// Experiment-specific axes and durations; each experiment reads the
/// fields that apply to it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hold_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tomography_step_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi_over_chi: Option<Vec<f64>>,
    /// Driven-Ramsey amplitude settings in instrument units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<Vec<f64>>,
    /// True `eps / 2pi` per unit setting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_scale_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoupled: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout_dim: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
}

impl TolerancesConfig {
    pub fn resolve(&self, base: Tolerances) -> Result<Tolerances> {
        let mut t = base;
        if let Some(r) = self.rtol {
            t = Tolerances { rtol: r, atol: r * 1e-2, ..t };
        }
        if let Some(a) = self.atol {
            t.atol = a;
        }
        t.validate().context("tolerances")?;
        Ok(t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drives: Option<DrivesConfig>,
    #[serde(default)]
    pub prep: PrepConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub tolerances: TolerancesConfig,
}

/// Parses and validates; schema errors name the offending key path.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| anyhow!("config: {e}"))?;
    let cfg: RunConfig =
        serde_path_to_error::deserialize(de).map_err(|e| anyhow!("config: at `{}`: {}", e.path(), e.inner()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!("config: schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version);
        }
        match (&self.drives, self.experiment.needs_drives()) {
            (None, true) => bail!("config: missing field `drives`, required for {:?}", self.experiment),
            (Some(d), _) => d.validate()?,
            (None, false) => {}
        }
        self.params.resolve()?;
        Ok(())
    }

    fn tolerances(&self, base: Tolerances, tol_override: Option<f64>) -> Result<Tolerances> {
        let mut t = self.tolerances.clone();
        if let Some(r) = tol_override {
            t.rtol = Some(r);
            t.atol = None;
        }
        t.resolve(base)
    }

    fn thermal(&self, p: &SystemParams, seed: u64, tol: Tolerances, abar_m: f64, abar_r: f64) -> ThermalResetConfig {
        let prep = ThermalPrep::new(self.prep.nbar.unwrap_or(30.0), self.prep.samples.unwrap_or(1500), seed);
        let mut c = ThermalResetConfig::device(prep);
        c.params = p.clone();
        c.coupling_m = p.chi_m * abar_m;
        c.coupling_r = p.chi_r * abar_r;
        if let Some(h) = self.sweep.hold_s {
            c.hold = us(h);
        }
        let step = self.sweep.tomography_step_s.map_or(2.0, us);
        let n = (c.hold / step).floor() as usize;
        c.tomography_holds = (0..=n).map(|k| k as f64 * step).collect();
        c.memory_dim = self.truncation.memory_dim;
        if let Some(d) = self.truncation.readout_dim {
            c.readout_dim = d;
        }
        c.tol = tol;
        c
    }

    /// The engine-side description, with defaults applied.
    pub fn resolve(&self, seed_override: Option<u64>, tol_override: Option<f64>) -> Result<ExperimentSpec> {
        self.validate()?;
        let p = self.params.resolve()?;
        let seed = seed_override.unwrap_or(self.seed);
        let drives = self.drives.clone().unwrap_or_default();
        let amps = if self.drives.is_some() { drives.memory_amplitudes(&p) } else { Vec::new() };
        let abar_r = drives.readout_amplitude(&p);
        let experiment = match self.experiment {
            ExperimentKind::ThermalReset => {
                let tol = self.tolerances(Tolerances::default(), tol_override)?;
                let ar = abar_r.unwrap_or(p.kappa_r / p.chi_r);
                Experiment::ThermalReset(amps.iter().map(|&a| self.thermal(&p, seed, tol, a, ar)).collect())
            }
            ExperimentKind::CouplingSweep => {
                let tol = self.tolerances(Tolerances::default(), tol_override)?;
                let ar = abar_r.unwrap_or(0.5 * p.kappa_r / p.chi_r);
                let mut c = CouplingSweepConfig::new(self.thermal(&p, seed, tol, 0.0, ar));
                c.fractions = amps.iter().map(|a| a * p.chi_m / p.kappa_r).collect();
                Experiment::CouplingSweep(c)
            }
            ExperimentKind::VacuumRabi => {
                let cfgs = amps
                    .iter()
                    .map(|&a| {
                        let mut c = VacuumRabiConfig::device(a);
                        c.params = p.clone();
                        c.duration = self.sweep.duration_s.map(us);
                        if let Some(n) = self.sweep.points {
                            c.points = n;
                        }
                        if let Some(d) = self.truncation.memory_dim {
                            c.memory_dim = d;
                        }
                        c.closed = self.sweep.closed.unwrap_or(false);
                        c.tol = self.tolerances(c.tol, tol_override)?;
                        Ok(c)
                    })
                    .collect::<Result<_>>()?;
                Experiment::VacuumRabi(cfgs)
            }
            ExperimentKind::FockReset => {
                let mut c = FockResetConfig::device();
                c.params = p.clone();
                if let Some(&a) = amps.first() {
                    c.coupling_m = p.chi_m * a;
                }
                if let Some(a) = abar_r {
                    c.coupling_r = p.chi_r * a;
                }
                if let Some(d) = self.sweep.duration_s {
                    c.reset_duration = us(d);
                }
                if let Some(n) = self.sweep.points {
                    c.points = n;
                }
                if let Some(d) = self.truncation.memory_dim {
                    c.memory_dim = d;
                }
                if let Some(d) = self.truncation.readout_dim {
                    c.readout_dim = d;
                }
                c.closed = self.sweep.closed.unwrap_or(false);
                c.tol = self.tolerances(c.tol, tol_override)?;
                Experiment::FockReset(c)
            }
            ExperimentKind::DrivenRamsey => {
                let mut c = RamseyConfig::device();
                c.params = p.clone();
                c.sideband_detuning = p.omega_rabi;
                if let Some(s) = &self.sweep.settings {
                    c.settings = s.clone();
                }
                if let Some(e) = self.sweep.eps_scale_hz {
                    c.eps_scale = hz_to_angular(e);
                }
                if let Some(d) = self.sweep.duration_s {
                    c.duration = us(d);
                }
                if let Some(n) = self.sweep.points {
                    c.points = n;
                }
                if let Some(d) = self.truncation.memory_dim {
                    c.memory_dim = d;
                }
                c.tol = self.tolerances(c.tol, tol_override)?;
                if self.sweep.decoupled.unwrap_or(false) {
                    c = c.decoupled();
                }
                c.validate()?;
                Experiment::DrivenRamsey(c)
            }
            ExperimentKind::FrameValidation => {
                let ratios = self.sweep.rabi_over_chi.clone().unwrap_or_else(|| vec![400.0]);
                let mut cfgs = Vec::new();
                for &a in &amps {
                    for &ratio in &ratios {
                        let mut c = FrameValidationConfig::new(a, ratio);
                        c.params = p.clone();
                        if let Some(n) = self.sweep.points {
                            c.points = n;
                        }
                        if let Some(d) = self.truncation.memory_dim {
                            c.memory_dim = d;
                        }
                        c.tol = self.tolerances(c.tol, tol_override)?;
                        cfgs.push(c);
                    }
                }
                Experiment::FrameValidation(cfgs)
            }
        };
        let spec = ExperimentSpec::new(experiment, seed);
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "schema_version = 1\nexperiment = \"vacuum_rabi\"\n[drives]\nabar_m = [1.0]\n";

    #[test]
    fn defaults_are_the_device_table() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.params.resolve().unwrap(), SystemParams::device());
    }

    #[test]
    fn round_trip_is_identity() {
        let text = r#"
schema_version = 1
experiment = "thermal_reset"
seed = 42
output_dir = "out"
[params]
chi_m_hz = 28500.0
bath_nbar_m = 0.045
[drives]
abar_m_over_kappa_chi = [0.25, 0.5]
eps_r_hz = 1.0e6
[prep]
nbar = 5.0
[sweep]
hold_s = 2.0e-5
[tolerances]
rtol = 1.0e-7
"#;
        let cfg = parse_config(text).unwrap();
        let again = parse_config(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn fraction_resolves_to_amplitude() {
        let text = "schema_version = 1\nexperiment = \"thermal_reset\"\n[drives]\nabar_m_over_kappa_chi = [0.5]\n";
        let cfg = parse_config(text).unwrap();
        let p = cfg.params.resolve().unwrap();
        let a = cfg.drives.unwrap().memory_amplitudes(&p)[0];
        assert!((a - 6.70).abs() < 0.01, "{a}");
    }

    #[test]
    fn empty_drives_is_named() {
        let err = parse_config("schema_version = 1\nexperiment = \"thermal_reset\"\n[drives]\n").unwrap_err();
        assert!(err.to_string().contains("drives"), "{err}");
        let err = parse_config("schema_version = 1\nexperiment = \"thermal_reset\"\n").unwrap_err();
        assert!(err.to_string().contains("drives"), "{err}");
    }

    #[test]
    fn amplitude_and_eps_conflict() {
        let text = "schema_version = 1\nexperiment = \"vacuum_rabi\"\n[drives]\nabar_m = [1.0]\neps_m_hz = [1e6]\n";
        assert!(parse_config(text).unwrap_err().to_string().contains("mutually exclusive"));
    }

    #[test]
    fn unknown_key_reports_path() {
        let text = format!("{MINIMAL}[params]\nchi_q_hz = 1.0\n");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("params") && err.contains("chi_q_hz"), "{err}");
    }

    #[test]
    fn wrong_schema_version() {
        assert!(parse_config("schema_version = 2\nexperiment = \"fock_reset\"\n").is_err());
    }

    #[test]
    fn eps_gives_steady_amplitude() {
        let p = SystemParams::device();
        let eps_hz = 9e6;
        let a = amplitude_from_eps(&p, Mode::Memory, eps_hz);
        // Detuned by the Rabi frequency, abar is close to eps / Omega_R.
        assert!((a - hz_to_angular(eps_hz) / p.omega_rabi).abs() < 1e-3 * a);
    }
}
