use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("ladder step leaves the multiplet: j = {j}, m = {m}")]
    LadderDomain { j: f64, m: f64 },

    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not symmetric (max deviation {0:.3e})")]
    NotSymmetric(f64),

    #[error("qubit count mismatch: expected {expected}, got {got}")]
    QubitMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("expected {expected} circuit parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("fold count must be an odd positive integer, got {0}")]
    InvalidFold(i64),

    #[error("invalid noise model: {0}")]
    InvalidNoise(String),

    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("calibration matrix is singular; counts cannot be mitigated")]
    Unmitigable,

    #[error("extrapolation needs at least two distinct fold values: {0}")]
    Extrapolation(String),

    #[error("product has non-real coefficient {im:.3e}i on {label}")]
    ComplexCoefficient { label: String, im: f64 },

    #[error("failed to parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty sweep grid")]
    EmptyGrid,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
