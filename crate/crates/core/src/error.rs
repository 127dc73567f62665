use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: every subsystem needs at least two levels")]
    InvalidDimension { dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid subsystem slot {slot} for a layout with {len} subsystems")]
    InvalidSlot { slot: usize, len: usize },

    #[error("Fock level {n} does not fit in a space of dimension {dim}")]
    LevelOutOfRange { n: usize, dim: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("frame mismatch: cannot combine {left} with {right}")]
    FrameMismatch { left: String, right: String },

    #[error("operator does not conserve the sector charge (shift {0:?})")]
    NotCovariant(Vec<i64>),

    #[error("step size underflow in segment '{segment}' at t = {t} us (h = {h:e})")]
    Stiffness { segment: String, t: f64, h: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("fit did not converge: {0}")]
    FitFailure(String),

    #[error("calibration failure: {0}")]
    CalibrationFailure(String),

    #[error("state preparation failure: {0}")]
    Preparation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDimension { .. } => "invalid_dimension",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidSlot { .. } => "invalid_slot",
            Error::LevelOutOfRange { .. } => "level_out_of_range",
            Error::InvalidParams(_) => "invalid_params",
            Error::InvalidState(_) => "invalid_state",
            Error::FrameMismatch { .. } => "frame_mismatch",
            Error::NotCovariant(_) => "not_covariant",
            Error::Stiffness { .. } => "stiffness",
            Error::InsufficientData(_) => "insufficient_data",
            Error::DegenerateFit(_) => "degenerate_fit",
            Error::FitFailure(_) => "fit_failure",
            Error::CalibrationFailure(_) => "calibration_failure",
            Error::Preparation(_) => "preparation",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
