//! Dense complex linear algebra substrate.

pub mod eig;
pub mod matrix;
pub mod random;
pub mod span;
pub mod tolerance;

pub use eig::{hermitian_eig, min_eigenvalue, operator_norm, psd_check, top_singular, HermitianEig};
pub use matrix::{basis_vector, vdot, vnorm, vscale, vsub, ComplexMatrix, C_ONE, C_ZERO};
pub use span::{
    ampliate, join_components, kernel, orthonormal_vectors, orthonormalize, split_components, SpanBuilder, SquareArray,
};
pub use tolerance::ToleranceConfig;
