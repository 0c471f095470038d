use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum GeoError {
    /// Invalid configuration (unknown tags, mismatched pipeline setup).
    #[error("configuration error: {0}")]
    Config(String),

    /// Input outside the operation's domain (empty mesh, zero quaternion, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A stated precondition does not hold (e.g. solid voxelization of an
    /// open mesh).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An edge shared by more than two faces.
    #[error("non-manifold edge ({0}, {1}): more than two incident faces")]
    NonManifold(usize, usize),

    /// Text format parse failure.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Gradients requested from a non-differentiable configuration.
    #[error("gradient unsupported: {0}")]
    UnsupportedGradient(String),

    /// Too many finite-difference probes hit discontinuities to conclude
    /// anything; the caller should pick a better configuration.
    #[error("inconclusive gradient check: {skipped} of {total} probes skipped")]
    InconclusiveCheck { skipped: usize, total: usize },

    /// I/O failure, with the offending path.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl GeoError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> GeoError {
        GeoError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, GeoError>;
