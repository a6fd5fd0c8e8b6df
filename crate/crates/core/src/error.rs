use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("invalid density matrix: {constraint} (residual {residual:e})")]
    InvalidDensityMatrix {
        constraint: &'static str,
        residual: f64,
    },

    #[error("process matrix violates {constraint} (residual {residual:e})")]
    InvalidProcess {
        constraint: &'static str,
        residual: f64,
    },

    #[error("matrix inversion failed: {0}")]
    Inversion(String),

    #[error("time grid has {len} points, at least 5 are required")]
    GridTooShort { len: usize },

    #[error("time grid is not uniform near index {index}")]
    NonUniformGrid { index: usize },

    #[error("index {index} out of range for series of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("near-singular generator at t = {t} (sample {index}); split the integration window")]
    SingularWindow { index: usize, t: f64 },

    #[error("trace drifted by {drift:e} at t = {t}")]
    TraceDrift { t: f64, drift: f64 },

    #[error("singular time t = {t}: {what} vanishes")]
    SingularTime { t: f64, what: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "tomogram label ({k1},{k2}), time index {time_index}: {constraint} (residual {residual:e})"
    )]
    InvalidSnapshot {
        k1: usize,
        k2: usize,
        time_index: usize,
        constraint: &'static str,
        residual: f64,
    },

    #[error("malformed tomogram data: {0}")]
    MalformedTomograms(String),

    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
