use thiserror::Error;

/// Errors produced by tensor construction, metrics, means and field I/O.
#[derive(Debug, Error)]
pub enum TensorError {
    #[error("non-finite tensor component")]
    NonFinite,

    #[error("tensor is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is not a rotation (orthogonality error {orthogonality_error:e}, det {det})")]
    NotARotation { orthogonality_error: f64, det: f64 },

    #[error("ill-conditioned tensor (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("coordinate {value} outside [0, 1]")]
    OutOfRange { value: f64 },

    #[error("metric {0} is not supported for this operation")]
    UnsupportedMetric(&'static str),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("random sample stayed rank deficient after {attempts} attempts")]
    RankDeficient { attempts: usize },

    #[error("bad magic: not a DTF1 or dtf-text field file")]
    BadMagic,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("truncated file: expected {expected} bytes, found {found}")]
    TruncatedFile { expected: usize, found: usize },

    #[error("voxel {index}: {source}")]
    Voxel {
        index: usize,
        #[source]
        source: Box<TensorError>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl TensorError {
    pub(crate) fn at_voxel(self, index: usize) -> Self {
        TensorError::Voxel {
            index,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, TensorError>;
