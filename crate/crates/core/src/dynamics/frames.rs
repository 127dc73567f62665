//! Time-dependent Hamiltonians of a pulse sequence in each frame, and a
//! runner that integrates a sequence across the unmapping gate.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::lindblad::{collapse_operators, dressed_collapse_operators, evolve, EvolveOptions, Hamiltonian, Segmentation};
use super::pulse::PulseSequence;
use super::sector::{evolve_sectors, SectorState};
use super::trajectory::Trajectory;
use crate::hilbert::{annihilation, embed, number, pauli, DensityMatrix, Operator, Pauli, SparseMatrix, QUBIT};
use crate::model::{
    dispersive_hamiltonian, effective_gate, effective_sideband_term, qubit_unitary, unmapping_pulse, DriveParams,
    FrameTag, Mode, SystemParams,
};
use crate::{Error, Result};

/// Frame a sequence is simulated in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimFrame {
    /// Bare rotating frame with explicit drives; only practical at small
    /// amplitudes.
    Lab,
    /// Displaced by the classical sideband response, all terms kept.
    Displaced,
    /// Effective Jaynes-Cummings model up to the gate, then the displaced
    /// frame without the fast-rotating displacement terms.
    Effective,
}

fn mode_ops(params: &SystemParams, mode: Mode) -> Result<(Operator, Operator)> {
    let layout = &params.layout;
    let dim = layout.dim(mode.slot())?;
    Ok((embed(&annihilation(dim)?, layout, mode.slot())?, embed(&number(dim)?, layout, mode.slot())?))
}

fn qubit(params: &SystemParams, which: Pauli) -> Result<Operator> {
    embed(&pauli(which), &params.layout, QUBIT)
}

fn envelope(seq: &Arc<PulseSequence>, mode: Mode, t: f64) -> (f64, f64) {
    let v = seq.values(t);
    match mode {
        Mode::Memory => (v.sideband_m, v.sideband_m_rate),
        Mode::Readout => (v.sideband_r, v.sideband_r_rate),
    }
}

fn add_rabi(h: &mut Hamiltonian, params: &SystemParams, seq: &Arc<PulseSequence>) -> Result<()> {
    if seq.rabi != 0.0 {
        let s = seq.clone();
        h.add_term(qubit(params, Pauli::X)?.scale(0.5 * seq.rabi), move |t| C64::new(s.values(t).rabi, 0.0))?;
    }
    Ok(())
}

/// `sum_i chi_i |abar_i|^2`, the constant removed from the qubit frequency
/// so that the Rabi drive stays resonant while the sidebands are on.
fn stark_compensation(params: &SystemParams, drives: &DriveParams) -> f64 {
    crate::model::stark_coefficient(params, drives)
}

/// Rotating-frame Hamiltonian with explicit drives.
pub fn lab_hamiltonian(params: &SystemParams, drives: &DriveParams, seq: &PulseSequence) -> Result<Hamiltonian> {
    let seq = Arc::new(seq.clone());
    let mut h = Hamiltonian::new(FrameTag::RotatingLab, params.layout.clone());
    h.add_constant(dispersive_hamiltonian(params)?)?;
    h.add_constant(qubit(params, Pauli::Z)?.scale(-stark_compensation(params, drives)))?;
    add_rabi(&mut h, params, &seq)?;
    for mode in Mode::BOTH {
        let (a, _) = mode_ops(params, mode)?;
        let eps = match mode {
            Mode::Memory => seq.eps_m,
            Mode::Readout => seq.eps_r,
        };
        let (s, detuning, seq) = (drives.sign(mode).exponent(), drives.detuning, seq.clone());
        h.add_hermitian_pair(a.adjoint(), move |t| {
            eps * envelope(&seq, mode, t).0 * C64::new(0.0, -s * detuning * t).exp()
        })?;
    }
    Ok(h)
}

/// Hamiltonian in the frame displaced by `alpha_i(t) = s_i(t) abar_i e^{-i s Delta t}`,
/// keeping every term, including the small drive left over by the ramps.
pub fn displaced_hamiltonian(params: &SystemParams, drives: &DriveParams, seq: &PulseSequence) -> Result<Hamiltonian> {
    let seq = Arc::new(seq.clone());
    let mut h = Hamiltonian::new(FrameTag::DisplacedRotating, params.layout.clone());
    h.add_constant(dispersive_hamiltonian(params)?)?;
    add_rabi(&mut h, params, &seq)?;
    let sz = qubit(params, Pauli::Z)?;
    let mut stark = Vec::new();
    for mode in Mode::BOTH {
        let (a, _) = mode_ops(params, mode)?;
        let abar = drives.steady_amplitude(params, mode);
        if abar.norm() == 0.0 {
            continue;
        }
        let chi = params.chi(mode);
        let s = drives.sign(mode).exponent();
        let detuning = drives.detuning;
        let phase = move |t: f64| C64::new(0.0, -s * detuning * t).exp();
        let seq_a = seq.clone();
        h.add_hermitian_pair(&a.adjoint() * &sz, move |t| chi * abar * envelope(&seq_a, mode, t).0 * phase(t))?;
        let seq_r = seq.clone();
        h.add_hermitian_pair(a.adjoint(), move |t| {
            C64::new(0.0, -1.0) * envelope(&seq_r, mode, t).1 * abar * phase(t)
        })?;
        stark.push((chi * abar.norm_sqr(), mode));
    }
    if !stark.is_empty() {
        let seq = seq.clone();
        h.add_term(sz, move |t| {
            let v: f64 = stark.iter().map(|&(c, mode)| c * (envelope(&seq, mode, t).0.powi(2) - 1.0)).sum();
            C64::new(v, 0.0)
        })?;
    }
    Ok(h)
}

/// Effective Jaynes-Cummings Hamiltonian in the dressed interaction picture
/// rotating at the sideband detuning. Sideband envelopes scale the couplings;
/// a Rabi drive below the detuning appears as a dressed-qubit detuning.
pub fn effective_hamiltonian(params: &SystemParams, drives: &DriveParams, seq: &PulseSequence) -> Result<Hamiltonian> {
    let seq = Arc::new(seq.clone());
    let mut h = Hamiltonian::new(FrameTag::EffectiveJc, params.layout.clone());
    for mode in Mode::BOTH {
        let abar = drives.steady_amplitude(params, mode);
        let term = effective_sideband_term(params, mode, abar, drives.sign(mode))?;
        let seq = seq.clone();
        h.add_term(term, move |t| C64::new(envelope(&seq, mode, t).0, 0.0))?;
    }
    let (rabi, detuning) = (seq.rabi, drives.detuning);
    let s = seq.clone();
    h.add_term(qubit(params, Pauli::Z)?.scale(0.5), move |t| C64::new(rabi * s.values(t).rabi - detuning, 0.0))?;
    Ok(h)
}

/// Displaced-frame Hamiltonian after the gate with the displacement terms,
/// which rotate at the detuning, dropped.
pub fn post_gate_hamiltonian(params: &SystemParams, drives: &DriveParams, seq: &PulseSequence) -> Result<Hamiltonian> {
    let seq = Arc::new(seq.clone());
    let mut h = Hamiltonian::new(FrameTag::DisplacedRotating, params.layout.clone());
    h.add_constant(dispersive_hamiltonian(params)?)?;
    let stark: Vec<(f64, Mode)> = Mode::BOTH
        .iter()
        .map(|&m| (params.chi(m) * drives.steady_amplitude(params, m).norm_sqr(), m))
        .filter(|x| x.0 > 0.0)
        .collect();
    if !stark.is_empty() {
        h.add_term(qubit(params, Pauli::Z)?, move |t| {
            let v: f64 = stark.iter().map(|&(c, mode)| c * (envelope(&seq, mode, t).0.powi(2) - 1.0)).sum();
            C64::new(v, 0.0)
        })?;
    }
    Ok(h)
}

/// Named integration intervals of a sequence.
pub fn segmentation(seq: &PulseSequence) -> Segmentation {
    Segmentation {
        boundaries: seq
            .starts()
            .into_iter()
            .zip(&seq.segments)
            .filter(|(_, s)| s.duration > 0.0)
            .map(|(t, s)| (t, s.name.clone()))
            .collect(),
    }
}

/// Trajectories of one sequence run.
#[derive(Clone, Debug)]
pub struct SequenceRun<S> {
    /// Up to the gate (or the end when there is none).
    pub before_gate: Trajectory,
    pub after_gate: Option<Trajectory>,
    /// States at the requested sample times before the gate, when stored.
    pub states: Vec<S>,
    /// Final state, in bare coordinates of the displaced (or lab) frame.
    pub final_state: S,
}

impl<S> SequenceRun<S> {
    /// Last value of a column over the whole run.
    pub fn final_value(&self, column: &str) -> Option<f64> {
        self.after_gate.as_ref().unwrap_or(&self.before_gate).last(column)
    }
}

/// Integrates a pulse sequence in a chosen frame.
#[derive(Clone, Debug)]
pub struct SequenceRunner {
    pub params: SystemParams,
    pub drives: DriveParams,
    pub sequence: PulseSequence,
    pub frame: SimFrame,
    pub options: EvolveOptions,
}

fn split_times(times: &[f64], start: f64, cut: f64, end: f64) -> (Vec<f64>, Vec<f64>) {
    let mut before = vec![start];
    before.extend(times.iter().copied().filter(|&t| t > start && t < cut));
    if cut > start {
        before.push(cut);
    }
    let mut after = vec![cut.max(start)];
    after.extend(times.iter().copied().filter(|&t| t > cut.max(start) && t < end));
    if end > *after.last().unwrap() {
        after.push(end);
    }
    (before, after)
}

impl SequenceRunner {
    pub fn new(params: SystemParams, drives: DriveParams, sequence: PulseSequence, frame: SimFrame) -> Self {
        SequenceRunner { params, drives, sequence, frame, options: EvolveOptions::default() }
    }

    fn stages(&self) -> Result<(Hamiltonian, crate::dynamics::CollapseSet, Hamiltonian, crate::dynamics::CollapseSet)> {
        let (p, d, s) = (&self.params, &self.drives, &self.sequence);
        Ok(match self.frame {
            SimFrame::Lab => {
                let h = lab_hamiltonian(p, d, s)?;
                (h.clone(), collapse_operators(p)?, h, collapse_operators(p)?)
            }
            SimFrame::Displaced => {
                let h = displaced_hamiltonian(p, d, s)?;
                (h.clone(), collapse_operators(p)?, h, collapse_operators(p)?)
            }
            SimFrame::Effective => (
                effective_hamiltonian(p, d, s)?,
                dressed_collapse_operators(p)?,
                post_gate_hamiltonian(p, d, s)?,
                collapse_operators(p)?,
            ),
        })
    }

    /// Gate time; the effective frame needs one to return to bare coordinates.
    fn gate(&self) -> Result<f64> {
        match (self.sequence.gate_time(), self.frame) {
            (Some(t), _) => Ok(t),
            (None, SimFrame::Effective) => {
                Err(Error::InvalidParams("the effective frame needs a sequence with an unmapping gate".into()))
            }
            (None, _) => Ok(f64::INFINITY),
        }
    }

    fn gate_matrix(&self, t: f64) -> nalgebra::DMatrix<C64> {
        match self.frame {
            SimFrame::Effective => effective_gate(self.drives.detuning, t),
            _ => unmapping_pulse(),
        }
    }

    /// Runs a dense state from `start`. Before the gate the state must be in
    /// the coordinates of the chosen frame (effective-frame coordinates for
    /// [`SimFrame::Effective`]).
    pub fn run_dense(&self, rho: &DensityMatrix, start: f64, times: &[f64]) -> Result<SequenceRun<DensityMatrix>> {
        let (h1, c1, h2, c2) = self.stages()?;
        let gate = self.gate()?;
        let end = self.sequence.total_duration();
        let mut opts = self.options.clone();
        opts.segmentation = segmentation(&self.sequence);
        let (before_t, after_t) = split_times(times, start, gate.min(end), end);
        let before = evolve(rho, &h1, &c1, &before_t, &opts)?;
        let mut state = before.final_state.clone().expect("evolve sets the final state");
        let states = before.states.clone();
        if gate > end || start > gate {
            return Ok(SequenceRun { before_gate: before, after_gate: None, states, final_state: state });
        }
        let u = qubit_unitary(&self.params.layout, &self.gate_matrix(gate))?;
        state = state.transform(&u)?;
        let mut post_opts = opts.clone();
        post_opts.store_states = false;
        let after = evolve(&state, &h2, &c2, &after_t, &post_opts)?;
        let final_state = after.final_state.clone().expect("evolve sets the final state");
        Ok(SequenceRun { before_gate: before, after_gate: Some(after), states, final_state })
    }

    /// Sector-resolved counterpart of [`SequenceRunner::run_dense`]; only the
    /// effective frame conserves charge.
    pub fn run_sectors(&self, state: &SectorState, start: f64, times: &[f64]) -> Result<SequenceRun<SectorState>> {
        if self.frame != SimFrame::Effective {
            return Err(Error::InvalidParams("sector runs need the effective frame".into()));
        }
        let (h1, c1, h2, c2) = self.stages()?;
        let gate = self.gate()?;
        let end = self.sequence.total_duration();
        let mut opts = self.options.clone();
        opts.segmentation = segmentation(&self.sequence);
        let (before_t, after_t) = split_times(times, start, gate, end);
        let mut before_state = state.clone();
        let mut before = None;
        let mut states = Vec::new();
        if start < gate {
            let run = evolve_sectors(state, &h1, &c1, &before_t, &opts)?;
            before_state = run.final_state;
            states = run.states;
            before = Some(run.trajectory);
        }
        let u = qubit_unitary(&self.params.layout, &self.gate_matrix(gate))?;
        let gated = before_state.transform(&SparseMatrix::from_dense(&u))?;
        let mut post_opts = opts.clone();
        post_opts.store_states = false;
        let after = evolve_sectors(&gated, &h2, &c2, &after_t, &post_opts)?;
        let before_gate = before.unwrap_or_else(|| Trajectory::new(FrameTag::EffectiveJc, after.trajectory.columns.clone()));
        Ok(SequenceRun { before_gate, after_gate: Some(after.trajectory), states, final_state: after.final_state })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::pulse::{rdr_sequence, rdr_sequence_with, SequenceOptions};
    use crate::hilbert::SpaceLayout;
    use crate::model::effective_jc_hamiltonian;

    fn small(dm: usize, dr: usize) -> SystemParams {
        SystemParams::device().with_layout(SpaceLayout::qubit_memory_readout(dm, dr).unwrap())
    }

    #[test]
    fn hamiltonians_hermitian_at_sampled_times() {
        let p = small(4, 3);
        let d = DriveParams::from_couplings(&p, 0.3, 0.4);
        let seq = rdr_sequence(&p, &d, 1.0).unwrap();
        for h in [
            lab_hamiltonian(&p, &d, &seq).unwrap(),
            displaced_hamiltonian(&p, &d, &seq).unwrap(),
            effective_hamiltonian(&p, &d, &seq).unwrap(),
            post_gate_hamiltonian(&p, &d, &seq).unwrap(),
        ] {
            for t in [0.0, 0.37, 1.1, 2.0, 3.3, 4.1] {
                assert!(h.at(t).hermiticity_error() < 1e-12, "{:?} at {t}", h.frame());
            }
        }
    }

    #[test]
    fn effective_hamiltonian_at_hold_is_jc() {
        let p = small(4, 3);
        let d = DriveParams::from_couplings(&p, 0.3, 0.4);
        let seq = rdr_sequence(&p, &d, 1.0).unwrap();
        let h = effective_hamiltonian(&p, &d, &seq).unwrap().at(2.0);
        let am = crate::model::effective_amplitude(d.steady_amplitude(&p, Mode::Memory));
        let ar = crate::model::effective_amplitude(d.steady_amplitude(&p, Mode::Readout));
        let jc = effective_jc_hamiltonian(&p, am, ar).unwrap();
        assert!((h.to_dense() - jc.to_dense()).norm() < 1e-12);
    }

    #[test]
    fn zero_amplitudes_reproduce_free_decay() {
        let p = small(6, 2);
        let d = DriveParams::off(&p);
        let opts = SequenceOptions { rabi_scale: 0.0, ..Default::default() };
        let seq = rdr_sequence_with(&p, &d, 2.0, opts).unwrap();
        let runner = SequenceRunner::new(p.clone(), d, seq.clone(), SimFrame::Lab);
        let q = DensityMatrix::fock_state(1, 2).unwrap();
        let m = DensityMatrix::coherent_state(C64::new(1.0, 0.5), 6).unwrap();
        let r = DensityMatrix::fock_state(0, 2).unwrap();
        let rho0 = DensityMatrix::product(p.layout.clone(), &[&q, &m, &r]).unwrap();
        let end = seq.total_duration();
        let run = runner.run_dense(&rho0, 0.0, &[end]).unwrap();
        let free = Hamiltonian::constant(FrameTag::RotatingLab, dispersive_hamiltonian(&p).unwrap());
        let reference = evolve(&rho0, &free, &collapse_operators(&p).unwrap(), &[0.0, end], &EvolveOptions::default()).unwrap();
        let f = run.final_state.fidelity(reference.final_state.as_ref().unwrap()).unwrap();
        assert!(f >= 1.0 - 1e-8, "fidelity {f}");
    }

    #[test]
    fn split_times_brackets_gate() {
        let (a, b) = split_times(&[0.5, 1.0, 2.0, 3.0], 0.0, 1.5, 3.2);
        assert_eq!(a, vec![0.0, 0.5, 1.0, 1.5]);
        assert_eq!(b, vec![1.5, 2.0, 3.0, 3.2]);
    }
}
