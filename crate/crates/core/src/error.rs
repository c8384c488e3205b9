use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is rank deficient: {0}")]
    RankDeficientInput(String),

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("sample set is empty")]
    EmptySample,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid encoding shape: l_tilde = {l_tilde} < l = {l}")]
    InvalidShape { l_tilde: usize, l: usize },

    #[error("channel coefficient has |h|^2 = {gain:e}, below floor {floor:e}")]
    ZeroChannel { gain: f64, floor: f64 },

    #[error("could not draw a channel coefficient above the gain floor {floor:e} after {attempts} attempts")]
    FloorUnsatisfiable { floor: f64, attempts: usize },

    #[error("rate {rate} does not give an integral block length for l = {l}")]
    NonIntegralBlocklength { rate: f64, l: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
