//! Orthonormal spans of vectors and matrices, and block assembly.

use num_complex::Complex64;

use super::matrix::{vdot, vnorm, ComplexMatrix};
use super::tolerance::ToleranceConfig;
use crate::error::{Error, Result};

/// Incrementally grown orthonormal basis of a subspace of ℂⁿ.
///
/// A candidate is accepted when its residual after two Gram-Schmidt passes
/// exceeds `tol · max(‖v‖, scale)`. The `scale` floor keeps near-zero inputs
/// (products that cancel to rounding noise) out of the basis.
#[derive(Debug, Clone)]
pub struct SpanBuilder {
    dim: usize,
    tol: f64,
    scale: f64,
    basis: Vec<Vec<Complex64>>,
}

impl SpanBuilder {
    pub fn new(dim: usize, tol: f64, scale: f64) -> Self {
        Self {
            dim,
            tol,
            scale,
            basis: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() >= self.dim
    }

    pub fn basis(&self) -> &[Vec<Complex64>] {
        &self.basis
    }

    pub fn into_basis(self) -> Vec<Vec<Complex64>> {
        self.basis
    }

    /// Component of `v` orthogonal to the current span.
    pub fn residual(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut r = v.to_vec();
        for _ in 0..2 {
            for b in &self.basis {
                let c = vdot(b, &r);
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri -= c * bi;
                }
            }
        }
        r
    }

    /// Coordinates of `v` in the current basis.
    pub fn coordinates(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.basis.iter().map(|b| vdot(b, v)).collect()
    }

    /// Adds the new direction carried by `v`, returning whether the span grew.
    pub fn push(&mut self, v: &[Complex64]) -> bool {
        assert_eq!(v.len(), self.dim, "span vector has wrong length");
        if self.is_full() {
            return false;
        }
        let norm = vnorm(v);
        if norm == 0.0 {
            return false;
        }
        let r = self.residual(v);
        let rn = vnorm(&r);
        if rn <= self.tol * norm.max(self.scale) {
            return false;
        }
        self.basis.push(r.into_iter().map(|z| z / rn).collect());
        true
    }

    /// Matrix whose columns are the basis vectors.
    pub fn as_columns(&self) -> ComplexMatrix {
        ComplexMatrix::from_columns(self.dim, &self.basis)
    }
}

/// Orthonormal basis of the span of `vectors` (each a column or flat vector).
pub fn orthonormalize(vectors: &[ComplexMatrix], cfg: &ToleranceConfig) -> Result<Vec<ComplexMatrix>> {
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    let shape = first.shape();
    if let Some(bad) = vectors.iter().find(|v| v.shape() != shape) {
        return Err(Error::DimensionMismatch(format!(
            "vector of shape {:?} among vectors of shape {:?}",
            bad.shape(),
            shape
        )));
    }
    let scale = vectors.iter().map(|v| v.frobenius_norm()).fold(0.0, f64::max);
    let mut span = SpanBuilder::new(shape.0 * shape.1, cfg.structural_tol, scale);
    for v in vectors {
        span.push(v.as_slice());
    }
    Ok(span
        .into_basis()
        .into_iter()
        .map(|b| ComplexMatrix::new(shape.0, shape.1, b).expect("finite basis"))
        .collect())
}

/// Orthonormal basis of the span of flat vectors.
pub fn orthonormal_vectors(vectors: &[Vec<Complex64>], dim: usize, tol: f64) -> Vec<Vec<Complex64>> {
    let scale = vectors.iter().map(|v| vnorm(v)).fold(0.0, f64::max);
    let mut span = SpanBuilder::new(dim, tol, scale);
    for v in vectors {
        span.push(v);
    }
    span.into_basis()
}

/// Square array of equally sized entries, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareArray<T> {
    d: usize,
    entries: Vec<T>,
}

impl<T> SquareArray<T> {
    pub fn new(d: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "{d}x{d} array needs {} entries, got {}",
                d * d,
                entries.len()
            )));
        }
        Ok(Self { d, entries })
    }

    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                entries.push(f(i, j));
            }
        }
        Self { d, entries }
    }

    pub fn single(entry: T) -> Self {
        Self {
            d: 1,
            entries: vec![entry],
        }
    }

    pub fn size(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.d + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> SquareArray<U> {
        SquareArray {
            d: self.d,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn try_map<U>(&self, f: impl FnMut(&T) -> Result<U>) -> Result<SquareArray<U>> {
        Ok(SquareArray {
            d: self.d,
            entries: self.entries.iter().map(f).collect::<Result<_>>()?,
        })
    }
}

impl<T: Clone> SquareArray<T> {
    pub fn diagonal(entries: &[T], zero: T) -> Self {
        let d = entries.len();
        Self::from_fn(d, |i, j| if i == j { entries[i].clone() } else { zero.clone() })
    }
}

/// Assembles the `dm×dm` matrix with block `(i, j)` taken from the array.
pub fn ampliate(blocks: &SquareArray<ComplexMatrix>) -> Result<ComplexMatrix> {
    let d = blocks.size();
    if d == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let (r, c) = blocks.get(0, 0).shape();
    if r != c {
        return Err(Error::DimensionMismatch(format!("blocks must be square, got {r}x{c}")));
    }
    let mut out = ComplexMatrix::zeros(d * r, d * r);
    for i in 0..d {
        for j in 0..d {
            let b = blocks.get(i, j);
            if b.shape() != (r, r) {
                return Err(Error::DimensionMismatch(format!(
                    "block ({i},{j}) has shape {:?}, expected {r}x{r}",
                    b.shape()
                )));
            }
            out.set_block(i * r, j * r, b);
        }
    }
    Ok(out)
}

/// Splits a vector of ℂ^{dm} into its `d` components in ℂ^m.
pub fn split_components(v: &[Complex64], d: usize) -> Vec<Vec<Complex64>> {
    if d == 0 {
        return Vec::new();
    }
    let m = v.len() / d;
    if m == 0 {
        return vec![Vec::new(); d];
    }
    v.chunks(m).map(|c| c.to_vec()).collect()
}

/// Concatenates components into a vector of ℂ^{dm}.
pub fn join_components(parts: &[Vec<Complex64>]) -> Vec<Complex64> {
    parts.iter().flatten().copied().collect()
}

/// Orthonormal coefficient vectors `w` spanning the kernel of `w ↦ Σ w_k images[k]`.
///
/// Kernel directions are the eigenvectors of the Gram matrix whose eigenvalue is at most
/// `tol · max(1, λ_max)`.
pub fn kernel(images: &[Vec<Complex64>], tol: f64) -> Vec<Vec<Complex64>> {
    let k = images.len();
    if k == 0 {
        return Vec::new();
    }
    let gram = ComplexMatrix::from_fn(k, k, |i, j| vdot(&images[i], &images[j]));
    let eig = super::eig::hermitian_eig(&gram.hermitian_part(), &ToleranceConfig::default())
        .expect("Gram matrices are Hermitian");
    let cut = tol * eig.values[0].max(1.0);
    (0..k)
        .filter(|&i| eig.values[i] <= cut)
        .map(|i| eig.vector(i))
        .collect()
}
