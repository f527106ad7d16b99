use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("field point must lie above the trap plane (y = {0} µm)")]
    BelowPlane(f64),

    #[error("unknown electrode `{0}`")]
    UnknownElectrode(String),

    #[error("duplicate electrode name `{0}`")]
    DuplicateName(String),

    #[error("electrodes `{0}` and `{1}` overlap")]
    Overlap(String, String),

    #[error("layout has no RF electrodes")]
    NoRfElectrodes,

    #[error("minimum search did not converge after {iterations} iterations (|grad| = {grad_norm:e} eV/µm)")]
    NoConvergence { iterations: usize, grad_norm: f64 },

    #[error("stationary point at ({x:.3}, {y:.3}) µm is a saddle, not a minimum")]
    Saddle { x: f64, y: f64 },

    #[error("Hessian at the minimum is not positive definite")]
    NotPositiveDefinite,

    #[error("no bounding saddle found within the search window (trap unconfined)")]
    Unconfined,

    #[error("radial minimum not found: {0}")]
    RadialMinimum(String),

    #[error("target well depth {target} eV unreachable for u in [{lo}, {hi}] V")]
    DepthUnreachable { target: f64, lo: f64, hi: f64 },

    #[error("empty grid")]
    EmptyGrid,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status: 2 for bad input or configuration, 1 for a
    /// computation that could not be completed.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSpec(_)
            | Error::BelowPlane(_)
            | Error::UnknownElectrode(_)
            | Error::DuplicateName(_)
            | Error::Overlap(..)
            | Error::NoRfElectrodes
            | Error::EmptyGrid
            | Error::Json(_) => 2,
            _ => 1,
        }
    }
}
