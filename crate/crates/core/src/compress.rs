//! Maximizing vectors and finite-dimensional compressions: invariant subspaces built
//! from word suffixes, norm-attaining compressions, the bimodule compression and
//! star-word compressions evaluated inside the given ambient representation.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    ampliate, operator_norm,
    random::{random_matrix, rng_for},
    split_components, top_singular, vnorm, vsub, ComplexMatrix, SpanBuilder, SquareArray, ToleranceConfig, C_ONE,
};
use crate::opalg::{membership, FiniteOperatorAlgebra};

/// Whether a word factor enters as itself or through its adjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    Plain,
    Adjoint,
}

/// `coefficient · x₁ x₂ ⋯ x_N` with each `x_k` a matrix or the adjoint of one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordSpec {
    pub factors: Vec<(Source, ComplexMatrix)>,
    pub coefficient: Complex64,
}

impl WordSpec {
    pub fn new(factors: Vec<(Source, ComplexMatrix)>, coefficient: Complex64) -> Self {
        Self { factors, coefficient }
    }

    pub fn plain(factors: Vec<ComplexMatrix>) -> Self {
        Self::new(factors.into_iter().map(|m| (Source::Plain, m)).collect(), C_ONE)
    }

    fn factor(&self, k: usize) -> ComplexMatrix {
        match &self.factors[k] {
            (Source::Plain, m) => m.clone(),
            (Source::Adjoint, m) => m.adjoint(),
        }
    }

    fn dim(&self) -> Option<usize> {
        self.factors.first().map(|(_, m)| m.rows())
    }

    /// The word as a matrix in `M_m`.
    pub fn evaluate(&self, m: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::identity(m);
        for k in 0..self.factors.len() {
            out = &out * &self.factor(k);
        }
        out.scale(self.coefficient)
    }

    /// The word with every factor replaced by its compression `Q* x Q`, and the same
    /// adjoint markers (`Q*x*Q = (Q*xQ)*`).
    pub fn compressed(&self, q: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::identity(q.cols());
        for k in 0..self.factors.len() {
            out = &out * &self.factor(k).compress(q);
        }
        out.scale(self.coefficient)
    }

    /// `x_k x_{k+1} ⋯ x_N ξ` for every suffix, longest last.
    fn suffix_vectors(&self, xi: &[Complex64]) -> Vec<Vec<Complex64>> {
        let mut v = xi.to_vec();
        let mut out = Vec::with_capacity(self.factors.len());
        for k in (0..self.factors.len()).rev() {
            v = self.factor(k).matvec(&v);
            out.push(v.clone());
        }
        out
    }
}

/// `Σ words` as a matrix in `M_m`.
pub fn evaluate_sum(words: &[WordSpec], m: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m, m);
    for w in words {
        out += &w.evaluate(m);
    }
    out
}

/// Subspace, compressed operators and residuals of a compression.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompressionReport {
    /// Orthonormal columns spanning `F`.
    pub subspace_basis: ComplexMatrix,
    pub compressed_ops: Vec<(String, ComplexMatrix)>,
    pub identity_residual: f64,
    pub invariance_residual: f64,
    pub multiplicativity_residual: f64,
    pub norm_original: f64,
    pub norm_compressed: f64,
    pub dim_f: usize,
    pub ambient_dim: usize,
}

impl CompressionReport {
    pub fn norm_gap(&self) -> f64 {
        self.norm_original - self.norm_compressed
    }

    pub fn basis_vectors(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim_f).map(|k| self.subspace_basis.col(k)).collect()
    }
}

fn check_vectors(xi: &[Vec<Complex64>], m: usize) -> Result<()> {
    if let Some(bad) = xi.iter().find(|v| v.len() != m) {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} in ambient dimension {m}",
            bad.len()
        )));
    }
    Ok(())
}

fn check_words(words: &[WordSpec], m: usize) -> Result<()> {
    for w in words {
        for (_, f) in &w.factors {
            if f.shape() != (m, m) {
                return Err(Error::DimensionMismatch(format!(
                    "word factor of shape {:?} in ambient dimension {m}",
                    f.shape()
                )));
            }
        }
    }
    Ok(())
}

/// `F = F₀ + span(𝒜·F₀)`: the smallest `𝒜`-invariant subspace containing `F₀`.
fn saturate(alg: &FiniteOperatorAlgebra, f0: &[Vec<Complex64>], cfg: &ToleranceConfig) -> ComplexMatrix {
    let m = alg.ambient_dim();
    let scale = f0.iter().map(|v| vnorm(v)).fold(0.0, f64::max);
    let mut seed = SpanBuilder::new(m, cfg.structural_tol, scale);
    for v in f0 {
        seed.push(v);
    }
    let mut span = SpanBuilder::new(m, cfg.structural_tol, 1.0);
    for v in seed.basis() {
        span.push(v);
    }
    for v in seed.basis() {
        for b in alg.basis() {
            if span.is_full() {
                break;
            }
            span.push(&b.matvec(v));
        }
    }
    span.as_columns()
}

fn invariance_residual(alg: &FiniteOperatorAlgebra, q: &ComplexMatrix) -> f64 {
    let proj = q * &q.adjoint();
    let comp = &ComplexMatrix::identity(alg.ambient_dim()) - &proj;
    alg.basis()
        .iter()
        .map(|b| operator_norm(&(&(&comp * b) * q)))
        .fold(0.0, f64::max)
}

fn multiplicativity_residual(alg: &FiniteOperatorAlgebra, q: &ComplexMatrix) -> f64 {
    let compressed: Vec<ComplexMatrix> = alg.basis().iter().map(|b| b.compress(q)).collect();
    let mut worst: f64 = 0.0;
    for (i, a) in alg.basis().iter().enumerate() {
        for (j, b) in alg.basis().iter().enumerate() {
            let lhs = (a * b).compress(q);
            let rhs = &compressed[i] * &compressed[j];
            worst = worst.max(operator_norm(&(&lhs - &rhs)));
        }
    }
    worst
}

/// Unit vector `ζ` with `‖Aζ‖ = ‖A‖` (top eigenvector of `A*A`).
pub fn maximizing_vector(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let (sigma, v) = top_singular(a);
    if sigma == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(v)
}

/// Invariant subspace `F ⊇ Ξ` on which every word is reproduced by its compressed factors.
///
/// `F₀` collects `Ξ` and all suffix products `x_k ⋯ x_N ξ`; `F = F₀ + 𝒜F₀`.
pub fn invariant_compression(
    alg: &FiniteOperatorAlgebra,
    words: &[WordSpec],
    xi: &[Vec<Complex64>],
    cfg: &ToleranceConfig,
) -> Result<CompressionReport> {
    let m = alg.ambient_dim();
    check_vectors(xi, m)?;
    check_words(words, m)?;
    let mut f0: Vec<Vec<Complex64>> = xi.to_vec();
    for w in words {
        for x in xi {
            f0.extend(w.suffix_vectors(x));
        }
    }
    let q = saturate(alg, &f0, cfg);
    let mut identity_residual: f64 = 0.0;
    let total = evaluate_sum(words, m);
    let total_c: ComplexMatrix = words.iter().fold(ComplexMatrix::zeros(q.cols(), q.cols()), |acc, w| {
        &acc + &w.compressed(&q)
    });
    for x in xi {
        let xc = q.adjoint().matvec(x);
        for w in words {
            let direct = w.evaluate(m).matvec(x);
            let via = q.matvec(&w.compressed(&q).matvec(&xc));
            identity_residual = identity_residual.max(vnorm(&vsub(&direct, &via)));
        }
        let direct = total.matvec(x);
        let via = q.matvec(&total_c.matvec(&xc));
        identity_residual = identity_residual.max(vnorm(&vsub(&direct, &via)));
    }
    let compressed_ops = words
        .iter()
        .enumerate()
        .map(|(k, w)| (format!("word_{k}"), w.compressed(&q)))
        .collect();
    Ok(CompressionReport {
        dim_f: q.cols(),
        ambient_dim: m,
        invariance_residual: invariance_residual(alg, &q),
        multiplicativity_residual: multiplicativity_residual(alg, &q),
        norm_original: operator_norm(&total),
        norm_compressed: operator_norm(&total_c),
        identity_residual,
        compressed_ops,
        subspace_basis: q,
    })
}

fn ampliated_compression(a: &SquareArray<ComplexMatrix>, q: &ComplexMatrix) -> ComplexMatrix {
    ampliate(&a.map(|x| x.compress(q))).expect("square compressions")
}

/// Compression `π(b) = P_F b|_F` attaining `‖A‖` for `A ∈ M_d(𝒜)`, with
/// `F = span(ξᵢ) + 𝒜·span(ξᵢ)` for the components `ξᵢ` of a maximizing vector.
pub fn norm_attaining_compression(
    alg: &FiniteOperatorAlgebra,
    a: &SquareArray<ComplexMatrix>,
    cfg: &ToleranceConfig,
) -> Result<CompressionReport> {
    let m = alg.ambient_dim();
    for (k, x) in a.entries().iter().enumerate() {
        if x.shape() != (m, m) {
            return Err(Error::DimensionMismatch(format!("entry {k} has shape {:?}", x.shape())));
        }
        if membership(alg, x, cfg)?.is_none() {
            return Err(Error::EntriesNotInAlgebra(format!(
                "entry ({}, {})",
                k / a.size(),
                k % a.size()
            )));
        }
    }
    let big = ampliate(a)?;
    let norm_original = operator_norm(&big);
    let d = a.size();
    let xi = if norm_original > 0.0 {
        split_components(&maximizing_vector(&big)?, d)
    } else {
        vec![crate::linalg::basis_vector(m, 0)]
    };
    let q = saturate(alg, &xi, cfg);
    let compressed = ampliated_compression(a, &q);
    let compressed_ops = (0..d * d)
        .map(|k| (format!("a_{}_{}", k / d, k % d), a.entries()[k].compress(&q)))
        .collect();
    Ok(CompressionReport {
        dim_f: q.cols(),
        ambient_dim: m,
        identity_residual: 0.0,
        invariance_residual: invariance_residual(alg, &q),
        multiplicativity_residual: multiplicativity_residual(alg, &q),
        norm_original,
        norm_compressed: operator_norm(&compressed),
        compressed_ops,
        subspace_basis: q,
    })
}

/// Compression onto `X_Ξ = span(Ξ ∪ 𝒜Ξ)` together with its sampled verification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BimoduleCompression {
    pub basis: ComplexMatrix,
    /// `max ‖ρ(a*tb) − ρ(a)*ρ(t)ρ(b)‖` over sampled `a, b ∈ 𝒜`, `t ∈ M_m`.
    pub bimodule_residual: f64,
    /// `max ‖ρ(ab) − ρ(a)ρ(b)‖` over the same samples.
    pub homomorphism_residual: f64,
    pub samples: usize,
}

impl BimoduleCompression {
    /// `ρ_Ξ(t) = P_X t|_X`.
    pub fn apply(&self, t: &ComplexMatrix) -> ComplexMatrix {
        t.compress(&self.basis)
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    /// `ρ_Ξ^{(d)}(T)`.
    pub fn apply_array(&self, t: &SquareArray<ComplexMatrix>) -> ComplexMatrix {
        ampliated_compression(t, &self.basis)
    }
}

/// Builds `ρ_Ξ` and checks `ρ(a*tb) = ρ(a)*ρ(t)ρ(b)` on seeded triples with `a, b` drawn from `𝒜`.
pub fn bimodule_compression(
    alg: &FiniteOperatorAlgebra,
    xi: &[Vec<Complex64>],
    samples: usize,
    cfg: &ToleranceConfig,
) -> Result<BimoduleCompression> {
    let m = alg.ambient_dim();
    if xi.is_empty() {
        return Err(Error::InvalidConfig("Ξ must be nonempty".into()));
    }
    check_vectors(xi, m)?;
    let q = saturate(alg, xi, cfg);
    let mut rng = rng_for(cfg.rng_seed, 0xb1_0d);
    let mut out = BimoduleCompression {
        basis: q,
        bimodule_residual: 0.0,
        homomorphism_residual: 0.0,
        samples,
    };
    for _ in 0..samples {
        let (bim, hom) = bimodule_sample(alg, &out, &mut rng);
        out.bimodule_residual = out.bimodule_residual.max(bim);
        out.homomorphism_residual = out.homomorphism_residual.max(hom);
    }
    Ok(out)
}

fn bimodule_sample<R: Rng + ?Sized>(alg: &FiniteOperatorAlgebra, rho: &BimoduleCompression, rng: &mut R) -> (f64, f64) {
    let m = alg.ambient_dim();
    let a = alg.random_element(rng);
    let b = alg.random_element(rng);
    let t = random_matrix(m, m, rng);
    let lhs = rho.apply(&(&(&a.adjoint() * &t) * &b));
    let rhs = &(&rho.apply(&a).adjoint() * &rho.apply(&t)) * &rho.apply(&b);
    let scale = 1.0 + operator_norm(&a) * operator_norm(&t) * operator_norm(&b);
    let hom = operator_norm(&(&rho.apply(&(&a * &b)) - &(&rho.apply(&a) * &rho.apply(&b))));
    let hom_scale = 1.0 + operator_norm(&a) * operator_norm(&b);
    (operator_norm(&(&lhs - &rhs)) / scale, hom / hom_scale)
}

/// `Ξ = {ζⱼ} ∪ {t_ij ζⱼ}` for a vector `ζ ∈ ℌ^{(d)}`.
pub fn certifying_xi(t: &SquareArray<ComplexMatrix>, zeta: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
    let d = t.size();
    let m = t.entries().first().map_or(0, |x| x.rows());
    if zeta.len() != d * m {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for a {d}x{d} array over M_{m}",
            zeta.len()
        )));
    }
    let parts = split_components(zeta, d);
    let mut xi = parts.clone();
    for i in 0..d {
        for (j, zj) in parts.iter().enumerate() {
            xi.push(t.get(i, j).matvec(zj));
        }
    }
    Ok(xi)
}

/// Compression attaining `‖Σ words‖` on an `𝒜`-invariant `F` containing its maximizing vector.
pub fn word_norm_compression(
    alg: &FiniteOperatorAlgebra,
    words: &[WordSpec],
    cfg: &ToleranceConfig,
) -> Result<CompressionReport> {
    let m = alg.ambient_dim();
    check_words(words, m)?;
    for (k, w) in words.iter().enumerate() {
        for (j, (_, f)) in w.factors.iter().enumerate() {
            if membership(alg, f, cfg)?.is_none() {
                return Err(Error::EntriesNotInAlgebra(format!("factor {j} of word {k}")));
            }
        }
    }
    let s = evaluate_sum(words, m);
    let xi = match maximizing_vector(&s) {
        Ok(z) => vec![z],
        Err(_) => vec![crate::linalg::basis_vector(m, 0)],
    };
    invariant_compression(alg, words, &xi, cfg)
}

/// Dimension of the word family's ambient space, if any factor is present.
pub fn words_dimension(words: &[WordSpec]) -> Option<usize> {
    words.iter().find_map(|w| w.dim())
}
