use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimer length must be positive and finite, got {0}")]
    InvalidDimerLength(f64),

    #[error("rank deficient input: column {column} has residual norm {residual:e} after orthogonalization")]
    RankDeficient { column: usize, residual: f64 },

    #[error("eigensolver produced non-finite values ({0}); try a smaller zeta")]
    EigenDivergence(String),

    #[error("matrix is not symmetric: max |A - A^T| = {0:e}")]
    NotSymmetric(f64),

    #[error("dimension {dim} exceeds the dense limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("eps = {eps} violates the constraint eps in (0, 1/(sqrt(kappa)+1)) = (0, {upper})")]
    EpsOutOfRange { eps: f64, upper: f64 },

    #[error("insufficient records for rate estimate: need {needed}, have {available}")]
    InsufficientRecords { needed: usize, available: usize },

    #[error("landscape '{0}' has no known saddle")]
    MissingKnownSaddle(String),

    #[error("landscape '{0}' does not provide a dense Hessian")]
    MissingHessian(String),

    #[error("not a steady state: {0}")]
    NotSteadyState(String),

    #[error("iterate became non-finite at iteration {iter}")]
    Divergence { iter: usize },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("eigenvalue gap {gap:e} is below the threshold {threshold:e}")]
    DegenerateSpectrum { gap: f64, threshold: f64 },

    #[error("eigendecomposition failed: {0}")]
    EigenFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
