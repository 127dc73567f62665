//! End-to-end simulated experiments.

pub mod experiment;
pub mod prep;
pub mod rabi;
pub mod ramsey;
pub mod sweep;
pub mod thermal;
pub mod validation;

pub use prep::{ks_statistic, ks_threshold, mixture_populations, sample_thermal_displacements, ThermalPrep};
pub use thermal::{run_thermal_reset, ThermalResetConfig, ThermalResetResult, TomographyPoint};
pub use rabi::{fock_coupling, run_fock_reset, run_vacuum_rabi, FockResetConfig, FockResetResult, VacuumRabiConfig, VacuumRabiResult};
pub use ramsey::{run_driven_ramsey, RamseyConfig, RamseyResult, RamseySample};
pub use validation::{run_frame_validation, FrameValidationConfig, FrameValidationResult};
pub use sweep::{run_coupling_sweep, CouplingSweepConfig, CouplingSweepResult, SweepPoint, DEFAULT_FRACTIONS};
pub use experiment::{run_experiment, write_experiment, Experiment, ExperimentOutput, ExperimentSpec, SummaryRow, Table};
