//! Lindblad master-equation integration with pulse-sequence envelopes.
//!
//! Two solvers share one Hamiltonian description: a dense solver for any
//! model, and a charge-sector solver for the effective model, whose
//! couplings conserve a weighted excitation number.

mod frames;
mod integrator;
mod lindblad;
pub mod pulse;
mod schrodinger;
mod sector;
mod trajectory;

pub use frames::{
    displaced_hamiltonian, effective_hamiltonian, lab_hamiltonian, post_gate_hamiltonian, segmentation,
    SequenceRun, SequenceRunner, SimFrame,
};
pub use integrator::{Dopri5, OdeSystem, StepStats, Tolerances};
pub use lindblad::{
    collapse_operators, dressed_collapse_operators, evolve, CollapseSet, Coefficient, DenseLindblad, EvolveOptions,
    Hamiltonian, HamiltonianTerm, Segmentation,
};
pub use pulse::{ramp_envelope, rdr_sequence, rdr_sequence_with, PulseSequence, RampShape, SequenceOptions};
pub use schrodinger::evolve_pure;
pub use sector::{evolve_sectors, SectorLayout, SectorLindblad, SectorRun, SectorState};
pub use trajectory::{ObservableSet, Trajectory, TrajectoryMetadata};
