use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate point: range must be positive, got {0}")]
    DegeneratePoint(f64),

    #[error("non-positive range {0}")]
    NonPositiveRange(f64),

    #[error("invalid pose: {0}")]
    InvalidPose(String),

    #[error("bearing separation too large for bounded-noise expansion: |dtheta| + 2*beta_theta = {0} >= pi")]
    BearingSeparation(f64),

    #[error("collinear triple")]
    CollinearTriple,

    #[error("degenerate variance: residual {residual} with zero variance")]
    DegenerateVariance { residual: f64 },

    #[error("hypergraph has {n} vertices, exact search supports at most {max}; use heuristic")]
    TooLargeForExact { n: usize, max: usize },

    #[error("box outside FoV: rejection sampling failed {0} consecutive draws")]
    BoxOutsideFov(usize),

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
