use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range (size {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("matrix is not Hermitian (max |M - M^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Hamiltonian breaks mode parity (max off-sector element {deviation:e})")]
    SymmetryViolation { deviation: f64 },

    #[error("no sign change of the residual in [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("ansatz expects {expected} parameters, got {found}")]
    ParameterCount { expected: usize, found: usize },

    #[error("readout calibration of qubit {qubit} is unusable (p+ = {p_plus})")]
    InvalidCalibration { qubit: usize, p_plus: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
