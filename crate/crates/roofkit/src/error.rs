use thiserror::Error;

/// Errors for subalgebra-entropy computations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("input is not Hermitian: deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    NonHermitianInput { deviation: f64, tolerance: f64 },

    #[error("not positive semi-definite: eigenvalue {value:.3e}")]
    NegativeEigenvalue { value: f64 },

    #[error("trace is {trace} but must be 1 within {tolerance:.1e}")]
    InvalidTrace { trace: f64, tolerance: f64 },

    #[error("value {value} outside domain [{lo}, {hi}]")]
    DomainError { value: f64, lo: f64, hi: f64 },

    #[error("not an isometry: W†W deviates from the identity by {deviation:.3e}")]
    NotIsometry { deviation: f64 },

    #[error("optimizer diverged: objective moved {increase:.3e} against the descent direction")]
    OptimizerDiverged { increase: f64 },

    #[error("rank is {found}, expected {expected}")]
    RankMismatch { expected: usize, found: usize },

    #[error("Tr D² = {purity} is too close to 1 (pure state)")]
    DegenerateTrace { purity: f64 },

    #[error("degenerate Pauli frame: y = {y:.3e} is not positive")]
    DegenerateFrame { y: f64 },

    #[error("state does not commute with the transposition: ‖[D,U]‖ = {deviation:.3e}")]
    NotSymmetric { deviation: f64 },

    #[error("parameter {value} outside admissible range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("no curvature sign change inside [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("not in the hexagon regime: found {found} circle minima, expected 6")]
    NotHexagonRegime { found: usize },

    #[error("unknown lemma tag `{tag}`")]
    UnknownTag { tag: String },

    #[error("invalid ensemble: {reason}")]
    InvalidEnsemble { reason: String },

    #[error("invalid state vector: {reason}")]
    InvalidState { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
