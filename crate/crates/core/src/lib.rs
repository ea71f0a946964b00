//! Finite-dimensional operator algebra workbench.
//!
//! Matrix-level norms, norm-attaining compressions, quotient norms of block
//! sequences, truncated Fock representations of C*-correspondences and
//! C*-envelopes of subspaces of finite-dimensional C*-algebras.

pub mod blockseq;
pub mod compress;
pub mod envelope;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod opalg;

pub use blockseq::{BlockAlgebra, BlockElement, BlockProfile, TailTemplate};
pub use compress::{CompressionReport, Source, WordSpec};
pub use envelope::{BlockDecomposition, ShilovResult, UnitalSubspace};
pub use error::{Error, Result};
pub use fock::{Correspondence, FiniteCStarAlgebra, TensorPoly, TruncatedFockSpace};
pub use linalg::{ComplexMatrix, SquareArray, ToleranceConfig};
pub use num_complex::Complex64;
pub use opalg::FiniteOperatorAlgebra;
