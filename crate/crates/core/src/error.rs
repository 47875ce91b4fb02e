use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {0} must be even and at least 8")]
    InvalidGrid(usize),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("coefficient array has size {found}, expected {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("requested {requested} noise modes but only {available} fit the dealiasing band")]
    TooManyModes { requested: usize, available: usize },
    #[error("noise mode index {index} out of range (K = {k_modes})")]
    ModeIndex { index: usize, k_modes: usize },
    #[error("increment vector has length {found}, expected {expected}")]
    IncrementLength { expected: usize, found: usize },
    #[error("step {step} out of range (path has {n_steps} steps)")]
    StepOutOfRange { step: usize, n_steps: usize },
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("Wiener path failed its moment self-check: {0}")]
    PathSelfCheck(String),
    #[error("non-finite state at step {step} (t = {time})")]
    BlowUp { step: usize, time: f64 },
    #[error("ensemble too small: {found} members, need at least {required}")]
    InsufficientEnsemble { required: usize, found: usize },
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
