//! Finite-dimensional operator algebras as multiplicatively closed matrix spans.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    ampliate, kernel, operator_norm, psd_check, random::random_complex, ComplexMatrix, SpanBuilder, SquareArray,
    ToleranceConfig,
};

/// Multiplicatively closed span of matrices in `M_m` with a Frobenius-orthonormal basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteOperatorAlgebra {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
    unital: bool,
    generators: Vec<ComplexMatrix>,
}

impl FiniteOperatorAlgebra {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    /// `Σ c_k b_k`.
    pub fn element(&self, coeffs: &[Complex64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            out += &b.scale(*c);
        }
        out
    }

    /// Element with standard complex Gaussian coordinates.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix {
        let coeffs: Vec<Complex64> = (0..self.dim()).map(|_| random_complex(rng)).collect();
        self.element(&coeffs)
    }

    /// Largest Frobenius residual of `b_i b_j` outside the span, over basis pairs.
    pub fn closure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.basis {
            for b in &self.basis {
                worst = worst.max(self.projection_residual(&(a * b)));
            }
        }
        worst
    }

    /// Largest Frobenius residual of `b_k*` outside the span.
    pub fn star_residual(&self) -> f64 {
        self.basis
            .iter()
            .map(|b| self.projection_residual(&b.adjoint()))
            .fold(0.0, f64::max)
    }

    pub fn is_star_closed(&self, cfg: &ToleranceConfig) -> bool {
        self.star_residual() <= cfg.structural_tol
    }

    fn coordinates(&self, m: &ComplexMatrix) -> Vec<Complex64> {
        self.basis.iter().map(|b| b.frobenius_inner(m)).collect()
    }

    fn projection_residual(&self, m: &ComplexMatrix) -> f64 {
        let c = self.coordinates(m);
        m.dist(&self.element(&c))
    }

    /// Algebra with the given span, assumed closed; the spanning set is re-orthonormalized.
    pub fn from_span(ambient_dim: usize, span: &[ComplexMatrix], unital: bool, cfg: &ToleranceConfig) -> Result<Self> {
        check_dims(span, ambient_dim)?;
        let mut builder = MatrixSpan::new(ambient_dim, cfg.structural_tol);
        if unital {
            builder.push(&ComplexMatrix::identity(ambient_dim).scale_real(1.0 / (ambient_dim.max(1) as f64).sqrt()));
        }
        for m in span {
            if let Some(m) = normalized(m) {
                builder.push(&m);
            }
        }
        Ok(Self {
            ambient_dim,
            basis: builder.into_basis(),
            unital,
            generators: span.to_vec(),
        })
    }
}

/// Frobenius-orthonormal span of matrices in `M_m`, fed one candidate at a time.
#[derive(Debug, Clone)]
pub(crate) struct MatrixSpan {
    m: usize,
    inner: SpanBuilder,
}

impl MatrixSpan {
    pub(crate) fn new(m: usize, tol: f64) -> Self {
        Self {
            m,
            inner: SpanBuilder::new(m * m, tol, 1.0),
        }
    }

    /// Callers normalize candidates; the unit scale floor rejects rounding noise.
    pub(crate) fn push(&mut self, x: &ComplexMatrix) -> bool {
        self.inner.push(x.as_slice())
    }

    pub(crate) fn len(&self) -> usize {
        self.inner.len()
    }

    pub(crate) fn get(&self, k: usize) -> ComplexMatrix {
        ComplexMatrix::new(self.m, self.m, self.inner.basis()[k].clone()).expect("finite")
    }

    pub(crate) fn into_basis(self) -> Vec<ComplexMatrix> {
        let m = self.m;
        self.inner
            .into_basis()
            .into_iter()
            .map(|b| ComplexMatrix::new(m, m, b).expect("finite"))
            .collect()
    }
}

fn check_dims(mats: &[ComplexMatrix], m: usize) -> Result<()> {
    for (k, g) in mats.iter().enumerate() {
        if g.shape() != (m, m) {
            return Err(Error::DimensionMismatch(format!(
                "matrix {k} has shape {:?}, expected {m}x{m}",
                g.shape()
            )));
        }
    }
    Ok(())
}

fn normalized(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = m.frobenius_norm();
    (n > 0.0).then(|| m.scale_real(1.0 / n))
}

/// Smallest multiplicatively closed span containing the generators (and `I` when unital),
/// found by breadth-first product rounds until the dimension is stable.
pub fn generate_algebra(
    generators: &[ComplexMatrix],
    unital: bool,
    cfg: &ToleranceConfig,
) -> Result<FiniteOperatorAlgebra> {
    let m = match generators.first() {
        Some(g) => g.ensure_square()?,
        None if unital => {
            return Err(Error::DimensionMismatch(
                "cannot infer the ambient dimension from an empty generator list".into(),
            ))
        }
        None => 0,
    };
    generate_algebra_in(m, generators, unital, cfg)
}

/// As [`generate_algebra`] with an explicit ambient dimension, so empty generator lists are allowed.
pub fn generate_algebra_in(
    m: usize,
    generators: &[ComplexMatrix],
    unital: bool,
    cfg: &ToleranceConfig,
) -> Result<FiniteOperatorAlgebra> {
    check_dims(generators, m)?;
    let mut span = MatrixSpan::new(m, cfg.structural_tol);
    if unital {
        span.push(&ComplexMatrix::identity(m).scale_real(1.0 / (m.max(1) as f64).sqrt()));
    }
    for g in generators {
        if let Some(g) = normalized(g) {
            span.push(&g);
        }
    }
    let mut frontier_start = 0;
    loop {
        let len = span.len();
        if frontier_start == len || len == m * m {
            break;
        }
        for i in 0..len {
            for j in 0..len {
                if i < frontier_start && j < frontier_start {
                    continue;
                }
                let p = &span.get(i) * &span.get(j);
                if let Some(p) = normalized(&p) {
                    span.push(&p);
                }
            }
        }
        frontier_start = len;
    }
    Ok(FiniteOperatorAlgebra {
        ambient_dim: m,
        basis: span.into_basis(),
        unital,
        generators: generators.to_vec(),
    })
}

/// Frobenius coordinates of `m` in the algebra basis, or `None` when `m` lies outside the span.
pub fn membership(
    alg: &FiniteOperatorAlgebra,
    m: &ComplexMatrix,
    cfg: &ToleranceConfig,
) -> Result<Option<Vec<Complex64>>> {
    if m.shape() != (alg.ambient_dim, alg.ambient_dim) {
        return Err(Error::DimensionMismatch(format!(
            "matrix of shape {:?} tested against an algebra in M_{}",
            m.shape(),
            alg.ambient_dim
        )));
    }
    let coeffs = alg.coordinates(m);
    let residual = m.dist(&alg.element(&coeffs));
    if residual <= cfg.structural_tol * (1.0 + m.frobenius_norm()) {
        Ok(Some(coeffs))
    } else {
        Ok(None)
    }
}

/// Orthonormal basis of `{x ∈ 𝒜 : x* ∈ 𝒜}`.
pub fn adjoint_intersection(alg: &FiniteOperatorAlgebra, cfg: &ToleranceConfig) -> Vec<ComplexMatrix> {
    // x = Σ conj(w_k) b_k has x* = Σ w_k b_k*, so membership of x* is a linear condition on w.
    let images: Vec<Vec<Complex64>> = alg
        .basis
        .iter()
        .map(|b| {
            let bs = b.adjoint();
            let c = alg.coordinates(&bs);
            (&bs - &alg.element(&c)).into_vec()
        })
        .collect();
    let null = kernel(&images, cfg.structural_tol);
    let m = alg.ambient_dim;
    let mut span = MatrixSpan::new(m, cfg.structural_tol);
    for w in null {
        let conj: Vec<Complex64> = w.iter().map(|z| z.conj()).collect();
        let x = alg.element(&conj);
        // Symmetrize into Hermitian and skew parts so the basis is exactly *-closed.
        let h = x.hermitian_part();
        let k = (&x - &h).scale(Complex64::new(0.0, -1.0));
        for part in [h, k] {
            if let Some(p) = normalized(&part) {
                span.push(&p);
            }
        }
    }
    span.into_basis()
}

/// Norm of the ampliated array `[A_ij]` in `M_d(M_m)`.
pub fn level_norm(a: &SquareArray<ComplexMatrix>) -> Result<f64> {
    Ok(operator_norm(&ampliate(a)?))
}

/// Hyponormality test `a*a − aa* ≥ 0` together with `‖a*a − aa*‖`.
pub fn hyponormal_defect(a: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<(bool, f64)> {
    a.ensure_square()?;
    let c = &(&a.adjoint() * a) - &(a * &a.adjoint());
    let c = c.hermitian_part();
    Ok((psd_check(&c, cfg)?, operator_norm(&c)))
}

/// Matrix with every entry zero except `value` at `(i, j)`.
pub fn scaled_unit(n: usize, i: usize, j: usize, value: Complex64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(i, j)] = value;
    m
}

/// Upper-triangular matrix units `E_ij`, `i ≤ j` (or `i < j` when `strict`).
pub fn upper_triangular_units(n: usize, strict: bool) -> Vec<ComplexMatrix> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            if strict && i == j {
                continue;
            }
            out.push(ComplexMatrix::unit(n, i, j));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::random_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn nilpotent_generator() {
        let e12 = ComplexMatrix::unit(2, 0, 1);
        assert_eq!(
            generate_algebra(std::slice::from_ref(&e12), false, &cfg())
                .unwrap()
                .dim(),
            1
        );
        let alg = generate_algebra(&[e12], true, &cfg()).unwrap();
        assert_eq!(alg.dim(), 2);
        assert!(membership(&alg, &ComplexMatrix::identity(2), &cfg()).unwrap().is_some());
    }

    /// Naive saturation: repeatedly multiply every pair until nothing new appears.
    fn brute_force_dim(gens: &[ComplexMatrix], m: usize) -> usize {
        let mut elems = vec![ComplexMatrix::identity(m)];
        elems.extend(gens.iter().cloned());
        loop {
            let mut span = MatrixSpan::new(m, 1e-9);
            for e in &elems {
                span.push(&e.scale_real(1.0 / e.frobenius_norm().max(1e-300)));
            }
            let before = span.len();
            let basis = span.clone().into_basis();
            for a in &basis {
                for b in &basis {
                    let p = a * b;
                    span.push(&p.scale_real(1.0 / p.frobenius_norm().max(1e-300)));
                }
            }
            if span.len() == before {
                return before;
            }
            elems = span.into_basis();
        }
    }

    #[test]
    fn random_generators_saturate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let gens = vec![random_matrix(3, 3, &mut rng), random_matrix(3, 3, &mut rng)];
        let alg = generate_algebra(&gens, true, &cfg()).unwrap();
        assert!(alg.dim() <= 9);
        assert_eq!(alg.dim(), brute_force_dim(&gens, 3));
        assert!(alg.closure_residual() < 1e-10);
    }

    #[test]
    fn membership_examples() {
        let alg = generate_algebra(&[ComplexMatrix::unit(2, 0, 1)], true, &cfg()).unwrap();
        assert!(membership(&alg, &ComplexMatrix::unit(2, 1, 0), &cfg())
            .unwrap()
            .is_none());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let coeffs = vec![random_complex(&mut rng), random_complex(&mut rng)];
        let x = alg.element(&coeffs);
        let got = membership(&alg, &x, &cfg()).unwrap().unwrap();
        for (g, c) in got.iter().zip(&coeffs) {
            assert!((g - c).norm() < 1e-9);
        }
        assert!(membership(&alg, &ComplexMatrix::identity(3), &cfg()).is_err());
    }

    #[test]
    fn adjoint_intersection_examples() {
        let full = generate_algebra(
            &[ComplexMatrix::unit(2, 0, 1), ComplexMatrix::unit(2, 1, 0)],
            true,
            &cfg(),
        )
        .unwrap();
        assert_eq!(adjoint_intersection(&full, &cfg()).len(), 4);

        let tri = generate_algebra(&[ComplexMatrix::unit(2, 0, 1)], true, &cfg()).unwrap();
        let inter = adjoint_intersection(&tri, &cfg());
        assert_eq!(inter.len(), 1);
        assert!(
            inter[0].dist(&ComplexMatrix::identity(2).scale_real(1.0 / 2f64.sqrt())) < 1e-12
                || inter[0].dist(&ComplexMatrix::identity(2).scale_real(-1.0 / 2f64.sqrt())) < 1e-12
        );

        let strict = generate_algebra(&upper_triangular_units(3, true), false, &cfg()).unwrap();
        assert_eq!(strict.dim(), 3);
        assert!(adjoint_intersection(&strict, &cfg()).is_empty());
    }

    #[test]
    fn level_norm_examples() {
        let e12 = ComplexMatrix::unit(2, 0, 1);
        assert!((level_norm(&SquareArray::single(e12)).unwrap() - 1.0).abs() < 1e-12);
        let i2 = ComplexMatrix::identity(2);
        let z = ComplexMatrix::zeros(2, 2);
        let jordan = SquareArray::new(2, vec![i2.clone(), i2.clone(), z, i2]).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((level_norm(&jordan).unwrap() - golden).abs() < 1e-9);
    }

    #[test]
    fn hyponormal_examples() {
        let (h, n) = hyponormal_defect(&ComplexMatrix::real_diag(&[1.0, -2.0]), &cfg()).unwrap();
        assert!(h && n == 0.0);
        let (h, n) = hyponormal_defect(&ComplexMatrix::unit(2, 0, 1), &cfg()).unwrap();
        assert!(!h);
        assert!((n - 1.0).abs() < 1e-12);
    }
}
