//! Runnable experiment descriptions and their on-disk artifacts: a JSON
//! manifest, one CSV per sweep point and a summary CSV.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::rabi::{run_fock_reset, run_vacuum_rabi, FockResetConfig, VacuumRabiConfig};
use super::ramsey::{run_driven_ramsey, RamseyConfig};
use super::sweep::{run_coupling_sweep, CouplingSweepConfig};
use super::thermal::{run_thermal_reset, ThermalResetConfig, ThermalResetResult};
use super::validation::{run_frame_validation, FrameValidationConfig};
use crate::angular_to_hz;
use crate::dynamics::Trajectory;
use crate::model::FrameTag;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "config", rename_all = "snake_case")]
pub enum Experiment {
    /// One thermal reset per memory coupling in the list.
    ThermalReset(Vec<ThermalResetConfig>),
    FockReset(FockResetConfig),
    /// One trace per memory amplitude.
    VacuumRabi(Vec<VacuumRabiConfig>),
    DrivenRamsey(RamseyConfig),
    CouplingSweep(CouplingSweepConfig),
    FrameValidation(Vec<FrameValidationConfig>),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::ThermalReset(_) => "thermal_reset",
            Experiment::FockReset(_) => "fock_reset",
            Experiment::VacuumRabi(_) => "vacuum_rabi",
            Experiment::DrivenRamsey(_) => "driven_ramsey",
            Experiment::CouplingSweep(_) => "coupling_sweep",
            Experiment::FrameValidation(_) => "frame_validation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    /// Replaces the seed of every thermal preparation.
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(experiment: Experiment, seed: u64) -> Self {
        ExperimentSpec { experiment, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let empty = match &self.experiment {
            Experiment::ThermalReset(v) => v.is_empty(),
            Experiment::VacuumRabi(v) => v.is_empty(),
            Experiment::FrameValidation(v) => v.is_empty(),
            Experiment::CouplingSweep(c) => c.fractions.is_empty(),
            Experiment::DrivenRamsey(c) => c.settings.is_empty(),
            Experiment::FockReset(_) => false,
        };
        if empty {
            return Err(Error::InvalidParams(format!("{}: sweep list is empty", self.experiment.kind())));
        }
        Ok(())
    }

    fn seeded(&self) -> Experiment {
        let mut e = self.experiment.clone();
        match &mut e {
            Experiment::ThermalReset(v) => v.iter_mut().for_each(|c| c.prep.seed = self.seed),
            Experiment::CouplingSweep(c) => c.base.prep.seed = self.seed,
            _ => {}
        }
        e
    }
}

/// Numeric table written as CSV with full-precision floats.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub frame: FrameTag,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(name: String, frame: FrameTag, columns: &[&str]) -> Self {
        Table { name, frame, columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    fn from_trajectory(name: String, t: &Trajectory) -> Self {
        let mut columns = vec!["time_us".to_string()];
        columns.extend(t.columns.iter().cloned());
        let rows = t.times.iter().zip(&t.rows).map(|(&s, r)| std::iter::once(s).chain(r.iter().copied()).collect());
        Table { name, frame: t.frame, columns, rows: rows.collect() }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.columns)?;
        for row in &self.rows {
            wr.write_record(row.iter().map(|v| v.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub point: usize,
    pub quantity: String,
    pub value: f64,
    pub std_error: f64,
    pub unit: String,
    pub frame: FrameTag,
}

impl SummaryRow {
    fn new(point: usize, quantity: &str, value: f64, std_error: f64, unit: &str, frame: FrameTag) -> Self {
        SummaryRow { point, quantity: quantity.into(), value, std_error, unit: unit.into(), frame }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub tables: Vec<Table>,
    pub summary: Vec<SummaryRow>,
    pub max_trace_drift: f64,
}

fn thermal_output(out: &mut ExperimentOutput, point: usize, run: &ThermalResetResult, kappa: f64) {
    let frame = FrameTag::EffectiveJc;
    let mut t = Table::new(
        format!("point{point:02}_tomography"),
        frame,
        &["hold_us", "nbar_estimate", "nbar_uncertainty", "nbar_exact", "vacuum_probability", "free_decay_nbar"],
    );
    for (p, (_, free)) in run.tomography.iter().zip(&run.free_decay) {
        t.rows.push(vec![p.hold, p.estimate.nbar, p.estimate.uncertainty, p.exact_nbar, p.vacuum_probability, *free]);
    }
    out.tables.push(t);
    out.tables.push(Table::from_trajectory(format!("point{point:02}_trajectory"), &run.trajectory));
    let s = &mut out.summary;
    s.push(SummaryRow::new(point, "initial_nbar", run.initial_nbar, 0.0, "photons", frame));
    s.push(SummaryRow::new(point, "final_nbar", run.final_nbar().unwrap_or(f64::NAN), 0.0, "photons", frame));
    match &run.fit {
        Ok(f) => {
            for r in f.report(kappa) {
                s.push(SummaryRow::new(point, &r.parameter, r.value, r.std_error, &r.unit, frame));
            }
        }
        Err(e) => log::warn!("point {point}: piecewise fit failed: {e}"),
    }
    out.max_trace_drift = out.max_trace_drift.max(run.max_trace_drift);
}

/// Runs the experiment; fixed seed and tolerances give identical output.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let mut out = ExperimentOutput::default();
    match spec.seeded() {
        Experiment::ThermalReset(cfgs) => {
            for (i, cfg) in cfgs.iter().enumerate() {
                let run = run_thermal_reset(cfg)?;
                thermal_output(&mut out, i, &run, cfg.params.kappa_r);
                let s = &mut out.summary;
                s.push(SummaryRow::new(i, "coupling_m", angular_to_hz(cfg.coupling_m) / 1e6, 0.0, "MHz", FrameTag::EffectiveJc));
            }
        }
        Experiment::CouplingSweep(cfg) => {
            let r = run_coupling_sweep(&cfg)?;
            for (i, (p, run)) in r.points.iter().zip(&r.runs).enumerate() {
                thermal_output(&mut out, i, run, r.kappa);
                let f = FrameTag::EffectiveJc;
                out.summary.push(SummaryRow::new(i, "coupling_m", p.fraction, 0.0, "kappa", f));
                out.summary.push(SummaryRow::new(i, "final_sigma_z", p.final_sigma_z, 0.0, "", f));
            }
        }
        Experiment::FockReset(cfg) => {
            let r = run_fock_reset(&cfg)?;
            let f = FrameTag::EffectiveJc;
            out.tables.push(Table::from_trajectory("point00_reset".into(), &r.reset));
            let e = r.fit.std_errors();
            let tau_err = e[1] / (r.fit.rate * r.fit.rate);
            out.summary.push(SummaryRow::new(0, "prep_fidelity", r.prep_fidelity, 0.0, "", f));
            out.summary.push(SummaryRow::new(0, "time_constant", r.time_constant(), tau_err, "us", f));
            out.summary.push(SummaryRow::new(0, "final_vacuum", r.final_vacuum, 0.0, "", f));
            out.max_trace_drift = r.max_trace_drift;
        }
        Experiment::VacuumRabi(cfgs) => {
            for (i, cfg) in cfgs.iter().enumerate() {
                let r = run_vacuum_rabi(cfg)?;
                let f = FrameTag::EffectiveJc;
                out.tables.push(Table::from_trajectory(format!("point{i:02}_rabi"), &r.trajectory));
                out.summary.push(SummaryRow::new(i, "abar_m", cfg.abar_m, 0.0, "", f));
                let (w, err) = r.fit.as_ref().map_or((f64::NAN, f64::NAN), |x| (x.omega, x.omega_error));
                out.summary.push(SummaryRow::new(i, "frequency", angular_to_hz(w) / 1e6, angular_to_hz(err) / 1e6, "MHz", f));
                let expected = angular_to_hz(r.expected_frequency) / 1e6;
                out.summary.push(SummaryRow::new(i, "expected_frequency", expected, 0.0, "MHz", f));
                out.max_trace_drift = out.max_trace_drift.max(r.max_trace_drift);
            }
        }
        Experiment::DrivenRamsey(cfg) => {
            let r = run_driven_ramsey(&cfg)?;
            let f = FrameTag::DisplacedRotating;
            let mut shifts =
                Table::new("stark_shifts".into(), f, &["setting", "shift_hz", "predicted_hz", "flagged"]);
            shifts.rows = r
                .samples
                .iter()
                .map(|s| vec![s.setting, angular_to_hz(s.shift), angular_to_hz(s.predicted), s.flagged.is_some() as u8 as f64])
                .collect();
            out.tables.push(shifts);
            for (i, (s, fringe)) in r.samples.iter().zip(&r.fringes).enumerate() {
                let mut t = Table::new(format!("point{i:02}_fringe"), f, &["time_us", "sigma_x"]);
                t.rows = fringe.iter().map(|&(a, b)| vec![a, b]).collect();
                out.tables.push(t);
                out.summary.push(SummaryRow::new(i, "setting", s.setting, 0.0, "", f));
                out.summary.push(SummaryRow::new(i, "stark_shift", angular_to_hz(s.shift) / 1e6, 0.0, "MHz", f));
                out.summary.push(SummaryRow::new(i, "predicted_shift", angular_to_hz(s.predicted) / 1e6, 0.0, "MHz", f));
                out.summary.push(SummaryRow::new(i, "flagged", s.flagged.is_some() as u8 as f64, 0.0, "", f));
            }
            let n = r.samples.len();
            match r.calibrate(&cfg.params, cfg.sideband_detuning) {
                Ok(c) => out.summary.push(SummaryRow::new(n, "eps_scale", c.scale, c.variance.sqrt(), "rad/us", f)),
                Err(e) => log::warn!("calibration failed: {e}"),
            }
            out.max_trace_drift = r.max_trace_drift;
        }
        Experiment::FrameValidation(cfgs) => {
            for (i, cfg) in cfgs.iter().enumerate() {
                let r = run_frame_validation(cfg)?;
                let f = FrameTag::RotatingLab;
                let mut t = Table::new(format!("point{i:02}_fidelity"), f, &["time_us", "fidelity"]);
                t.rows = r.times.iter().zip(&r.fidelity).map(|(&a, &b)| vec![a, b]).collect();
                out.tables.push(t);
                out.summary.push(SummaryRow::new(i, "rabi_over_chi", r.rabi_over_chi, 0.0, "", f));
                out.summary.push(SummaryRow::new(i, "min_fidelity", r.min_fidelity, 0.0, "", f));
                out.max_trace_drift = out.max_trace_drift.max(r.max_trace_drift);
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct Manifest<'a> {
    kind: &'a str,
    seed: u64,
    code_version: &'a str,
    spec: &'a ExperimentSpec,
    files: Vec<String>,
    frames: Vec<(String, FrameTag)>,
    max_trace_drift: f64,
}

/// Writes `manifest.json`, `<table>.csv` per table and `summary.csv` into
/// `dir`, creating it if needed. Returns the paths written.
pub fn write_experiment(dir: &Path, spec: &ExperimentSpec, out: &ExperimentOutput) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in &out.tables {
        let path = dir.join(format!("{}.csv", t.name));
        t.write_csv(std::fs::File::create(&path)?)?;
        written.push(path);
    }
    let summary = dir.join("summary.csv");
    let mut wr = csv::Writer::from_path(&summary)?;
    for row in &out.summary {
        wr.serialize(row)?;
    }
    wr.flush()?;
    written.push(summary);
    let manifest = Manifest {
        kind: spec.experiment.kind(),
        seed: spec.seed,
        code_version: env!("CARGO_PKG_VERSION"),
        spec,
        files: written.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect(),
        frames: out.tables.iter().map(|t| (t.name.clone(), t.frame)).collect(),
        max_trace_drift: out.max_trace_drift,
    };
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    written.push(path);
    Ok(written)
}
