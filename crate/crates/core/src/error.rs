use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel string {input:?}: {reason}")]
    KernelParse { input: String, reason: String },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid boundary regime: {0}")]
    InvalidBoundary(String),

    #[error("cannot enlarge a periodic field")]
    PeriodicEnlarge,

    #[error("invalid configuration field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("non-finite value produced at t = {t}; time step too large")]
    Unstable { t: f64 },

    #[error("snapshot time {t} is not a multiple of dt = {dt}")]
    SnapshotOffLattice { t: f64, dt: f64 },

    #[error("snapshots live on different grids")]
    GridMismatch,

    #[error("window [{lo}, {hi}] contains no grid nodes")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("tabulated initial condition has a row at x = {x} outside the domain")]
    TabulatedOutOfDomain { x: f64 },

    #[error("unknown scenario id {0:?}")]
    UnknownScenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
