use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid symbol: {0}")]
    Symbol(String),
    #[error("singular Gram matrix (det = {0:e}); use the affine realization for Euclidean symbols")]
    Singular(f64),
    #[error("operation needs a hyperbolic context")]
    NotHyperbolic,
    #[error("element is not proper: {0}")]
    NotProper(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("group closure exceeded cap of {0} elements")]
    CapExceeded(usize),
    #[error("matrix is not an isometry (residual {0:e})")]
    NotIsometry(f64),
    #[error("no isometry maps the source flag to the target flag (residual {0:e})")]
    IncompatibleFlags(f64),
    #[error("nothing to truncate: every vertex is proper")]
    NothingToTruncate,
    #[error("did not converge: {0}")]
    NoConvergence(String),
    #[error("polyhedron: {0}")]
    Polyhedron(String),
    #[error("unknown face id {0}")]
    UnknownFace(String),
    #[error("unknown solid {0}")]
    UnknownSolid(String),
    #[error("cobweb solid needs odd z >= 3, got {0}: the construction is only known for odd z")]
    CobwebParameter(i64),
    #[error("pairing contradiction: {message}")]
    Contradiction { message: String, trace: Vec<String> },
    #[error("pairing incomplete: {message}")]
    Orphan { message: String, trace: Vec<String> },
    #[error("fixture: {0}")]
    Fixture(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Derivation failures (as opposed to bad input).
    pub fn is_verification_failure(&self) -> bool {
        matches!(self, Error::Contradiction { .. } | Error::Orphan { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
