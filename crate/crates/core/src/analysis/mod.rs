//! Curve fitting and calibration formulas.

pub mod calibration;
pub mod fits;
pub mod lm;
pub mod report;

pub use calibration::{calibrate_sideband, shift_too_large, shifted_rabi_frequency, stark_shift, StarkCalibration, StarkShift};
pub use fits::{
    dominant_frequency, fit_damped_cosine, fit_exponential, fit_piecewise_decay, DampedCosineFit, ExponentialFit,
    PiecewiseFit, PiecewiseForm,
};
pub use lm::{levenberg_marquardt, LmFit, LmOptions, Model};
pub use report::{report_text, write_report_csv, ReportRow};
