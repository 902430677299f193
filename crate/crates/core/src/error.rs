use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("integrator step too large: trace drift {drift:.3e} at t = {time:.6e} s")]
    StepTooLarge { time: f64, drift: f64 },

    #[error("{0} outside its domain")]
    Domain(String),

    #[error("pulse shape {shape} not allowed here: {reason}")]
    Shape { shape: String, reason: String },

    #[error("pulses do not share a time grid")]
    GridMismatch,

    #[error("degenerate spectrum at sample {index} (gap {gap:.3e})")]
    Degenerate { index: usize, gap: f64 },

    #[error("division by zero field at sample {index}")]
    ZeroField { index: usize },

    #[error("target state is not pure (purity {purity:.6})")]
    NotPure { purity: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("interatomic separation is zero")]
    SingularInteraction,

    #[error("calibration bracket [{lo:.4e}, {hi:.4e}] s does not contain a pi conditional phase")]
    CalibrationBracket { lo: f64, hi: f64 },

    #[error("banded system is singular (pivot {pivot:.3e} at row {row})")]
    SingularBanded { row: usize, pivot: f64 },

    #[error("Krotov step stagnated after {attempts} damping attempts (last J = {last_j:.8})")]
    Stagnation { attempts: usize, last_j: f64 },

    #[error("reconstructed process is not completely positive (eigenvalue {eigenvalue:.3e})")]
    NotCompletelyPositive { eigenvalue: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
