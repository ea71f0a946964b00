//! Fixtures shared by the benchmarks.

use opalg_core::linalg::random::{random_matrix, rng_for};
use opalg_core::opalg::{generate_algebra, upper_triangular_units};
use opalg_core::{ComplexMatrix, FiniteOperatorAlgebra, ToleranceConfig};

pub fn random_square(n: usize, seed: u64) -> ComplexMatrix {
    random_matrix(n, n, &mut rng_for(seed, 0))
}

/// Upper triangular matrices in `M_n`.
pub fn triangular_algebra(n: usize, cfg: &ToleranceConfig) -> FiniteOperatorAlgebra {
    generate_algebra(&upper_triangular_units(n, false), true, cfg).expect("triangular algebra")
}
