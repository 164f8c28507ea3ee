use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("determinant {modulus:e} is within tolerance {tol:e} of zero")]
    NearZeroDeterminant { modulus: f64, tol: f64 },

    #[error("base point operator is singular (condition number {cond:e})")]
    SingularBasePoint { cond: f64 },

    #[error("eigenvalue iteration did not converge")]
    EigenFailure,

    #[error("singular value iteration did not converge")]
    SvdFailure,

    #[error("integrand has not decayed at the grid boundary (max {boundary:e})")]
    InsufficientDecay { boundary: f64 },

    #[error("degenerate preimage at distance {residual:e} (|det| = {det:e})")]
    DegenerateRoot { residual: f64, det: f64 },

    #[error("Monte Carlo estimate needs at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("kernel table has no entry for point {0}")]
    MissingKernelEntry(usize),

    #[error("term count {count} exceeds the cap {cap}")]
    TermCap { count: u128, cap: u128 },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("analytic jacobian disagrees with finite differences (relative {0:e})")]
    JacobianMismatch(f64),

    #[error("unknown registry id `{0}`")]
    UnknownMap(String),
}
