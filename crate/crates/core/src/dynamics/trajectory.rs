//! Time series of observables (and optionally states) produced by a run.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::integrator::{StepStats, Tolerances};
use crate::hilbert::{embed, number, pauli, DensityMatrix, Operator, Pauli, SpaceLayout};
use crate::model::FrameTag;
use crate::{Error, Result};

/// Expectation-value observables evaluated at every sample.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    names: Vec<String>,
    ops: Vec<Operator>,
}

fn mode_column(label: &str) -> String {
    match label {
        "memory" => "nbar_m".into(),
        "readout" => "nbar_r".into(),
        other => format!("nbar_{other}"),
    }
}

impl ObservableSet {
    /// Photon numbers of every mode, plus `sigma_z` and `sigma_x` of a
    /// two-level slot labelled "qubit".
    pub fn standard(layout: &SpaceLayout) -> Result<Self> {
        let mut names = Vec::new();
        let mut ops = Vec::new();
        for (slot, (&dim, label)) in layout.dims().iter().zip(layout.labels()).enumerate() {
            if label == "qubit" && dim == 2 {
                for (name, which) in [("sigma_z", Pauli::Z), ("sigma_x", Pauli::X)] {
                    names.push(name.to_string());
                    ops.push(embed(&pauli(which), layout, slot)?);
                }
            } else {
                names.push(mode_column(label));
                ops.push(embed(&number(dim)?, layout, slot)?);
            }
        }
        Ok(ObservableSet { names, ops })
    }

    pub fn operators(&self) -> &[Operator] {
        &self.ops
    }

    /// Column names: the observables followed by `purity` and `trace`.
    pub fn columns(&self) -> Vec<String> {
        let mut c = self.names.clone();
        c.push("purity".into());
        c.push("trace".into());
        c
    }

    pub fn evaluate(&self, rho: &DMatrix<C64>) -> Vec<f64> {
        let mut out: Vec<f64> = self.ops.iter().map(|o| o.matrix().trace_with(rho).re).collect();
        out.push(rho.iter().map(|z| z.norm_sqr()).sum());
        out.push(rho.trace().re);
        out
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub frame: FrameTag,
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    /// Stored only when requested.
    pub states: Vec<DensityMatrix>,
    pub final_state: Option<DensityMatrix>,
    pub stats: StepStats,
    /// Largest `|Tr rho - 1|` over all samples.
    pub max_trace_drift: f64,
}

impl Trajectory {
    pub fn new(frame: FrameTag, columns: Vec<String>) -> Self {
        Trajectory {
            frame,
            columns,
            times: Vec::new(),
            rows: Vec::new(),
            states: Vec::new(),
            final_state: None,
            stats: StepStats::default(),
            max_trace_drift: 0.0,
        }
    }

    pub fn push(&mut self, t: f64, values: Vec<f64>, state: Option<DensityMatrix>) -> Result<()> {
        if values.len() != self.columns.len() {
            return Err(Error::DimensionMismatch { expected: self.columns.len(), found: values.len() });
        }
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::InvalidState(format!("sample time {t} does not follow {last}")));
            }
        }
        if let Some(k) = self.column_index("trace") {
            self.max_trace_drift = self.max_trace_drift.max((values[k] - 1.0).abs());
        }
        self.times.push(t);
        self.rows.push(values);
        if let Some(s) = state {
            self.states.push(s);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        let k = self.column_index(name)?;
        self.rows.last().map(|r| r[k])
    }

    /// Appends a later trajectory in the same frame with the same columns.
    pub fn extend(&mut self, other: Trajectory) -> Result<()> {
        if other.frame != self.frame {
            return Err(Error::FrameMismatch { left: self.frame.to_string(), right: other.frame.to_string() });
        }
        if other.columns != self.columns {
            return Err(Error::InvalidState("trajectory columns differ".into()));
        }
        let skip_first = matches!((self.times.last(), other.times.first()), (Some(a), Some(b)) if a == b);
        let mut states = other.states.into_iter();
        for (k, (t, row)) in other.times.into_iter().zip(other.rows).enumerate() {
            let state = states.next();
            if k == 0 && skip_first {
                continue;
            }
            self.push(t, row, state)?;
        }
        self.stats += other.stats;
        self.final_state = other.final_state.or(self.final_state.take());
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["time_us".to_string()];
        header.extend(self.columns.iter().cloned());
        wr.write_record(&header)?;
        for (t, row) in self.times.iter().zip(&self.rows) {
            let mut rec = vec![t.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::InvalidState(e.to_string()))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn metadata(&self, tol: &Tolerances, seed: Option<u64>, params: serde_json::Value) -> TrajectoryMetadata {
        TrajectoryMetadata {
            frame: self.frame,
            columns: self.columns.clone(),
            samples: self.len(),
            tolerances: *tol,
            seed,
            params,
            stats: self.stats,
            max_trace_drift: self.max_trace_drift,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// JSON sidecar written next to a trajectory CSV.
#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryMetadata {
    pub frame: FrameTag,
    pub columns: Vec<String>,
    pub samples: usize,
    pub tolerances: Tolerances,
    pub seed: Option<u64>,
    pub params: serde_json::Value,
    pub stats: StepStats,
    pub max_trace_drift: f64,
    pub code_version: String,
}

impl TrajectoryMetadata {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Trajectory {
        let mut t = Trajectory::new(FrameTag::EffectiveJc, vec!["nbar_m".into(), "trace".into()]);
        t.push(0.0, vec![2.0, 1.0], None).unwrap();
        t.push(0.5, vec![1.25, 1.0 + 1e-12], None).unwrap();
        t
    }

    #[test]
    fn rejects_non_increasing_times() {
        let mut t = sample();
        assert!(t.push(0.5, vec![1.0, 1.0], None).is_err());
        assert!(t.max_trace_drift > 0.0 && t.max_trace_drift < 1e-11);
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv_string().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("time_us,nbar_m,trace"));
        assert_eq!(lines.next(), Some("0,2,1"));
        assert_eq!(lines.count(), 1);
    }

    #[test]
    fn extend_requires_same_frame() {
        let mut a = sample();
        let mut b = Trajectory::new(FrameTag::RotatingLab, a.columns.clone());
        b.push(1.0, vec![0.0, 1.0], None).unwrap();
        assert!(a.extend(b).is_err());
        let mut c = Trajectory::new(FrameTag::EffectiveJc, a.columns.clone());
        c.push(0.5, vec![1.25, 1.0], None).unwrap();
        c.push(1.0, vec![1.0, 1.0], None).unwrap();
        a.extend(c).unwrap();
        assert_eq!(a.times, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn standard_columns() {
        let layout = SpaceLayout::qubit_memory_readout(3, 2).unwrap();
        let obs = ObservableSet::standard(&layout).unwrap();
        assert_eq!(obs.columns(), ["sigma_z", "sigma_x", "nbar_m", "nbar_r", "purity", "trace"]);
    }
}
