use thiserror::Error;

/// Errors raised by the workbench operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (symmetry residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("invalid tolerance configuration: {0}")]
    InvalidConfig(String),
    #[error("matrix is zero")]
    ZeroMatrix,
    #[error("entry {0} does not lie in the span of the algebra")]
    EntriesNotInAlgebra(String),
    #[error("block profile mismatch: {0}")]
    ProfileMismatch(String),
    #[error("element is not of the form C0 (x) I + sum Ck (x) Tk: {0}")]
    FormMismatch(String),
    #[error("block index {index} lies outside the explicit range 1..={horizon}")]
    IndexOutOfExplicitRange { index: usize, horizon: usize },
    #[error("invalid tail template: {0}")]
    InvalidTail(String),
    #[error("element does not belong to the correspondence: {0}")]
    ElementOutsideX(String),
    #[error("Fock cutoff {cutoff} is too small (need at least {required})")]
    CutoffTooSmall { cutoff: usize, required: usize },
    #[error("bad polynomial symbol: {0}")]
    BadSymbol(String),
    #[error("bad vertex set: {0}")]
    BadVertexSet(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("algebra is not closed under adjoints (residual {residual:e})")]
    NotStarClosed { residual: f64 },
    #[error("subspace does not contain the identity")]
    NotUnital,
    #[error("retained block set is empty")]
    EmptyRetention,
    #[error("block decomposition failed: {0}")]
    Decomposition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
