//! Simulation and analysis engine for Rabi-driven reset (RDR) of a high-Q
//! bosonic memory mode.
//!
//! The physical system is a transmon qubit dispersively coupled to a
//! long-lived memory mode and to a lossy readout mode. A resonant Rabi drive
//! on the qubit plus sideband drives on both modes, detuned by the Rabi
//! frequency, turn the dispersive interaction into an effective
//! Jaynes-Cummings exchange between the qubit's dressed states and each mode.
//! Photons then flow memory -> qubit -> readout -> environment.
//!
//! Conventions used throughout the crate:
//!
//! * time is measured in microseconds and all rates are angular rates in
//!   rad/us (so `2 * PI * 1.0` is a 1 MHz frequency);
//! * the subsystem order of every composite space is (qubit, memory, readout);
//! * the qubit basis is ordered (ground, excited), with `sigma_z = diag(-1, +1)`
//!   and `sigma_minus |e> = |g>`.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod model;
pub mod protocols;
pub mod tomography;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Conversion factor from a frequency in Hz to an angular rate in rad/us.
pub const HZ_TO_RAD_PER_US: f64 = 2.0 * std::f64::consts::PI * 1e-6;

/// Converts a cyclic frequency in Hz into the crate's angular unit (rad/us).
pub fn hz_to_angular(hz: f64) -> f64 {
    hz * HZ_TO_RAD_PER_US
}

/// Converts an angular rate in rad/us back into Hz.
pub fn angular_to_hz(rate: f64) -> f64 {
    rate / HZ_TO_RAD_PER_US
}
