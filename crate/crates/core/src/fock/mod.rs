//! C*-correspondences over finite-dimensional C*-algebras and their Fock spaces
//! truncated at a finite tensor level.

pub mod graph;
pub mod poly;
pub mod rfd;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    operator_norm,
    random::{random_complex, random_matrix, rng_for},
    ComplexMatrix, ToleranceConfig, C_ONE, C_ZERO,
};

pub use graph::{Edge, Graph};
pub use poly::{eval_tensor_poly, toeplitz_norm_estimate, Symbol, TensorPoly};
pub use rfd::{rfd_compression_tensor, subgraph_restriction, SubgraphRestriction, TensorCompression};

/// `𝔄 ≅ ⊕ᵢ M_{kᵢ}` with a faithful tracial state `τ = Σ wᵢ trᵢ/kᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteCStarAlgebra {
    block_dims: Vec<usize>,
    trace_weights: Vec<f64>,
}

impl FiniteCStarAlgebra {
    pub fn new(block_dims: Vec<usize>, trace_weights: Vec<f64>) -> Result<Self> {
        if block_dims.is_empty() || block_dims.contains(&0) {
            return Err(Error::InvalidConfig(
                "block dimensions must be positive and nonempty".into(),
            ));
        }
        if trace_weights.len() != block_dims.len() {
            return Err(Error::InvalidConfig("one trace weight per block is required".into()));
        }
        if trace_weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidConfig(
                "trace weights must be positive (faithful trace)".into(),
            ));
        }
        let total: f64 = trace_weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "trace weights sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            block_dims,
            trace_weights,
        })
    }

    /// Blocks with equal weights.
    pub fn uniform(block_dims: Vec<usize>) -> Result<Self> {
        let w = 1.0 / block_dims.len().max(1) as f64;
        let n = block_dims.len();
        Self::new(block_dims, vec![w; n])
    }

    /// `c(V) = ℂ^n`.
    pub fn commutative(n: usize) -> Self {
        Self::uniform(vec![1; n]).expect("n ≥ 1")
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn trace_weights(&self) -> &[f64] {
        &self.trace_weights
    }

    /// `Σ kᵢ²`.
    pub fn dim(&self) -> usize {
        self.block_dims.iter().map(|k| k * k).sum()
    }

    pub fn one(&self) -> AElement {
        AElement {
            blocks: self.block_dims.iter().map(|&k| ComplexMatrix::identity(k)).collect(),
        }
    }

    pub fn zero(&self) -> AElement {
        AElement {
            blocks: self.block_dims.iter().map(|&k| ComplexMatrix::zeros(k, k)).collect(),
        }
    }

    /// Matrix units `E^{(i)}_{rs}`, block by block, row-major.
    pub fn matrix_units(&self) -> Vec<AElement> {
        let mut out = Vec::with_capacity(self.dim());
        for (i, &k) in self.block_dims.iter().enumerate() {
            for r in 0..k {
                for s in 0..k {
                    let mut a = self.zero();
                    a.blocks[i] = ComplexMatrix::unit(k, r, s);
                    out.push(a);
                }
            }
        }
        out
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> AElement {
        AElement {
            blocks: self.block_dims.iter().map(|&k| random_matrix(k, k, rng)).collect(),
        }
    }

    /// `τ(a)`.
    pub fn trace(&self, a: &AElement) -> Complex64 {
        a.blocks
            .iter()
            .zip(&self.block_dims)
            .zip(&self.trace_weights)
            .map(|((b, &k), &w)| b.trace() * (w / k as f64))
            .sum()
    }

    pub fn contains(&self, a: &AElement) -> bool {
        a.blocks.len() == self.block_dims.len()
            && a.blocks.iter().zip(&self.block_dims).all(|(b, &k)| b.shape() == (k, k))
    }

    /// Left multiplication `L_a` in the basis `fᵢ_{rs} = √(kᵢ/wᵢ) E^{(i)}_{rs}`, orthonormal
    /// for `⟨x, y⟩ = τ(x*y)`; its entries are `⟨f_{rs}, L_a f_{ps}⟩ = a_{rp}`.
    pub fn left_multiplication(&self, a: &AElement) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        let mut offset = 0;
        for (b, &k) in a.blocks.iter().zip(&self.block_dims) {
            for r in 0..k {
                for p in 0..k {
                    let v = b[(r, p)];
                    if v == C_ZERO {
                        continue;
                    }
                    for s in 0..k {
                        out[(offset + r * k + s, offset + p * k + s)] = v;
                    }
                }
            }
            offset += k * k;
        }
        out
    }
}

/// Element of `𝔄`, one square block per summand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AElement {
    pub blocks: Vec<ComplexMatrix>,
}

impl AElement {
    /// Element of `ℂ^n` with the given coordinates.
    pub fn from_scalars(values: &[Complex64]) -> Self {
        Self {
            blocks: values.iter().map(|&v| ComplexMatrix::scalar(1, v)).collect(),
        }
    }

    /// Coordinates of a commutative element (diagonal entries of each block).
    pub fn scalars(&self) -> Vec<Complex64> {
        self.blocks.iter().map(|b| b[(0, 0)]).collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b.scale(s)).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    /// C*-norm: the largest block norm.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(operator_norm).fold(0.0, f64::max)
    }

    pub fn dist(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| operator_norm(&(a - b)))
            .fold(0.0, f64::max)
    }
}

/// Element of the correspondence `X` in its coordinate basis
/// (edge functions for graphs, block entries for `X = 𝔄`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XElement {
    pub coords: Vec<Complex64>,
}

impl XElement {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Self { coords }
    }

    /// `δ_e` for the edge (or coordinate) `k` of an `n`-dimensional `X`.
    pub fn delta(n: usize, k: usize) -> Self {
        let mut coords = vec![C_ZERO; n];
        coords[k] = C_ONE;
        Self { coords }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            coords: self.coords.iter().map(|a| a * s).collect(),
        }
    }
}

/// The correspondences the workbench realizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Correspondence {
    /// Graph correspondence over `c(V)`.
    Graph(Graph),
    /// `ℂ^d` over `ℂ`; realized as the graph with one vertex and `d` loops.
    Free(usize),
    /// `𝔄` as a correspondence over itself.
    SelfOverA(FiniteCStarAlgebra),
}

impl Correspondence {
    /// The graph realizing a graph-type correspondence.
    pub fn graph(&self) -> Option<Graph> {
        match self {
            Correspondence::Graph(g) => Some(g.clone()),
            Correspondence::Free(d) => Some(Graph::bouquet(*d)),
            Correspondence::SelfOverA(_) => None,
        }
    }

    /// The coefficient algebra.
    pub fn coefficients(&self) -> FiniteCStarAlgebra {
        match self {
            Correspondence::Graph(g) => FiniteCStarAlgebra::commutative(g.vertex_count().max(1)),
            Correspondence::Free(_) => FiniteCStarAlgebra::commutative(1),
            Correspondence::SelfOverA(a) => a.clone(),
        }
    }

    /// Dimension of `X` as a vector space.
    pub fn x_dim(&self) -> usize {
        match self {
            Correspondence::Graph(g) => g.edge_count(),
            Correspondence::Free(d) => *d,
            Correspondence::SelfOverA(a) => a.dim(),
        }
    }

    pub fn check_x(&self, x: &XElement) -> Result<()> {
        if x.coords.len() != self.x_dim() {
            return Err(Error::ElementOutsideX(format!(
                "{} coordinates supplied, X has dimension {}",
                x.coords.len(),
                self.x_dim()
            )));
        }
        if x.coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::ElementOutsideX("non-finite coordinate".into()));
        }
        Ok(())
    }

    pub fn check_a(&self, a: &AElement) -> Result<()> {
        if !self.coefficients().contains(a) {
            return Err(Error::DimensionMismatch(
                "element does not belong to the coefficient algebra".into(),
            ));
        }
        Ok(())
    }

    fn x_as_algebra(&self, x: &XElement) -> AElement {
        let alg = self.coefficients();
        let mut blocks = Vec::new();
        let mut pos = 0;
        for &k in alg.block_dims() {
            blocks.push(ComplexMatrix::new(k, k, x.coords[pos..pos + k * k].to_vec()).expect("finite"));
            pos += k * k;
        }
        AElement { blocks }
    }

    fn algebra_as_x(a: &AElement) -> XElement {
        XElement {
            coords: a.blocks.iter().flat_map(|b| b.as_slice().iter().copied()).collect(),
        }
    }

    /// `φ_X(a)x`.
    pub fn left(&self, a: &AElement, x: &XElement) -> XElement {
        match self.graph() {
            Some(g) => {
                let av = a.scalars();
                XElement {
                    coords: g.edges().iter().zip(&x.coords).map(|(e, c)| av[e.range] * c).collect(),
                }
            }
            None => Self::algebra_as_x(&a.mul(&self.x_as_algebra(x))),
        }
    }

    /// `x·a`.
    pub fn right(&self, x: &XElement, a: &AElement) -> XElement {
        match self.graph() {
            Some(g) => {
                let av = a.scalars();
                XElement {
                    coords: g.edges().iter().zip(&x.coords).map(|(e, c)| c * av[e.source]).collect(),
                }
            }
            None => Self::algebra_as_x(&self.x_as_algebra(x).mul(a)),
        }
    }

    /// `⟨x, y⟩ ∈ 𝔄`; for graphs `⟨x,y⟩(v) = Σ_{s(e)=v} conj(x(e)) y(e)`.
    pub fn inner(&self, x: &XElement, y: &XElement) -> AElement {
        match self.graph() {
            Some(g) => {
                let mut vals = vec![C_ZERO; g.vertex_count().max(1)];
                for ((e, a), b) in g.edges().iter().zip(&x.coords).zip(&y.coords) {
                    vals[e.source] += a.conj() * b;
                }
                AElement::from_scalars(&vals)
            }
            None => self.x_as_algebra(x).adjoint().mul(&self.x_as_algebra(y)),
        }
    }

    pub fn random_x<R: Rng + ?Sized>(&self, rng: &mut R) -> XElement {
        XElement {
            coords: (0..self.x_dim()).map(|_| random_complex(rng)).collect(),
        }
    }
}

/// Path basis of a graph Fock space: level `k` holds the paths of length `k`.
#[derive(Debug, Clone)]
struct PathLevels {
    /// Per level: `(range vertex, edges e₁…e_k)` with `s(eᵢ) = r(eᵢ₊₁)`.
    paths: Vec<Vec<(usize, Vec<usize>)>>,
    /// Per level below the cutoff: `(edge, index of eμ in the next level)` for each `μ`.
    successors: Vec<Vec<Vec<(usize, usize)>>>,
}

impl PathLevels {
    fn build(g: &Graph, cutoff: usize) -> Self {
        let mut paths = vec![(0..g.vertex_count()).map(|v| (v, Vec::new())).collect::<Vec<_>>()];
        let mut successors = Vec::with_capacity(cutoff);
        for k in 0..cutoff {
            let mut next = Vec::new();
            let mut succ = Vec::with_capacity(paths[k].len());
            for (r, mu) in &paths[k] {
                let mut s = Vec::new();
                for (e, edge) in g.edges().iter().enumerate() {
                    if edge.source == *r {
                        let mut path = Vec::with_capacity(mu.len() + 1);
                        path.push(e);
                        path.extend_from_slice(mu);
                        s.push((e, next.len()));
                        next.push((edge.range, path));
                    }
                }
                succ.push(s);
            }
            successors.push(succ);
            paths.push(next);
        }
        Self { paths, successors }
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Paths(PathLevels),
    Algebra(FiniteCStarAlgebra),
}

/// `⊕_{k≤N} X^{⊗k}` as a finite-dimensional Hilbert space with a level-graded basis.
#[derive(Debug, Clone)]
pub struct TruncatedFockSpace {
    corr: Correspondence,
    cutoff: usize,
    offsets: Vec<usize>,
    backend: Backend,
}

impl TruncatedFockSpace {
    pub fn new(corr: Correspondence, cutoff: usize) -> Result<Self> {
        let backend = match corr.graph() {
            Some(g) => {
                if g.vertex_count() == 0 {
                    return Err(Error::InvalidGraph("graph has no vertices".into()));
                }
                Backend::Paths(PathLevels::build(&g, cutoff))
            }
            None => Backend::Algebra(corr.coefficients()),
        };
        let dims: Vec<usize> = match &backend {
            Backend::Paths(p) => p.paths.iter().map(|l| l.len()).collect(),
            Backend::Algebra(a) => vec![a.dim(); cutoff + 1],
        };
        let mut offsets = vec![0];
        for d in &dims {
            offsets.push(offsets.last().unwrap() + d);
        }
        Ok(Self {
            corr,
            cutoff,
            offsets,
            backend,
        })
    }

    pub fn correspondence(&self) -> &Correspondence {
        &self.corr
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn level_dim(&self, k: usize) -> usize {
        self.offsets[k + 1] - self.offsets[k]
    }

    pub fn level_offset(&self, k: usize) -> usize {
        self.offsets[k]
    }

    /// Dimension of levels `0..=k`.
    pub fn dim_through(&self, k: usize) -> usize {
        self.offsets[k.min(self.cutoff) + 1]
    }

    /// Edge sequence and range vertex of each basis vector at level `k` (graph backends).
    pub fn paths(&self, k: usize) -> Option<&[(usize, Vec<usize>)]> {
        match &self.backend {
            Backend::Paths(p) => Some(&p.paths[k]),
            Backend::Algebra(_) => None,
        }
    }

    /// Projection-free compression to levels `≤ k`: the leading principal submatrix.
    pub fn truncate(&self, op: &ComplexMatrix, k: usize) -> ComplexMatrix {
        let n = self.dim_through(k);
        op.submatrix(0, 0, n, n)
    }
}

/// Creation operator `t_∞(x)` on the truncation; it annihilates the top level.
pub fn creation(f: &TruncatedFockSpace, x: &XElement) -> Result<ComplexMatrix> {
    f.corr.check_x(x)?;
    let n = f.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    match &f.backend {
        Backend::Paths(p) => {
            for k in 0..f.cutoff {
                let (lo, hi) = (f.offsets[k], f.offsets[k + 1]);
                for (i, succ) in p.successors[k].iter().enumerate() {
                    for &(e, j) in succ {
                        let c = x.coords[e];
                        if c != C_ZERO {
                            out[(hi + j, lo + i)] = c;
                        }
                    }
                }
            }
        }
        Backend::Algebra(a) => {
            let lx = a.left_multiplication(&f.corr.x_as_algebra(x));
            for k in 0..f.cutoff {
                out.set_block(f.offsets[k + 1], f.offsets[k], &lx);
            }
        }
    }
    Ok(out)
}

/// Left action `ρ_∞(a)`, block diagonal across levels.
pub fn left_action(f: &TruncatedFockSpace, a: &AElement) -> Result<ComplexMatrix> {
    f.corr.check_a(a)?;
    let n = f.dim();
    let mut out = ComplexMatrix::zeros(n, n);
    match &f.backend {
        Backend::Paths(p) => {
            let av = a.scalars();
            for (k, level) in p.paths.iter().enumerate() {
                for (i, (r, _)) in level.iter().enumerate() {
                    out[(f.offsets[k] + i, f.offsets[k] + i)] = av[*r];
                }
            }
        }
        Backend::Algebra(alg) => {
            let la = alg.left_multiplication(a);
            for k in 0..=f.cutoff {
                out.set_block(f.offsets[k], f.offsets[k], &la);
            }
        }
    }
    Ok(out)
}

/// Defects of the three covariance relations on levels `≤ N−1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceResiduals {
    /// `ρ(a) t(x) − t(φ(a)x)`.
    pub left: f64,
    /// `t(x) ρ(a) − t(x·a)`.
    pub right: f64,
    /// `t(x₁)* t(x₂) − ρ(⟨x₁, x₂⟩)`.
    pub inner: f64,
}

impl CovarianceResiduals {
    pub fn max(&self) -> f64 {
        self.left.max(self.right).max(self.inner)
    }
}

/// Seeded check of the covariance relations, compressed to levels `≤ N−1`.
pub fn covariance_residuals(
    f: &TruncatedFockSpace,
    samples: usize,
    cfg: &ToleranceConfig,
) -> Result<CovarianceResiduals> {
    if f.cutoff < 2 {
        return Err(Error::CutoffTooSmall {
            cutoff: f.cutoff,
            required: 2,
        });
    }
    let alg = f.corr.coefficients();
    let top = f.cutoff - 1;
    let mut rng = rng_for(cfg.rng_seed, 0xc0_5a);
    let mut res = CovarianceResiduals {
        left: 0.0,
        right: 0.0,
        inner: 0.0,
    };
    for _ in 0..samples {
        let a = alg.random_element(&mut rng);
        let x1 = f.corr.random_x(&mut rng);
        let x2 = f.corr.random_x(&mut rng);
        let ra = left_action(f, &a)?;
        let t1 = creation(f, &x1)?;
        let t2 = creation(f, &x2)?;
        let scale = 1.0 + a.norm() * operator_norm(&t1);
        let left = &(&ra * &t1) - &creation(f, &f.corr.left(&a, &x1))?;
        let right = &(&t1 * &ra) - &creation(f, &f.corr.right(&x1, &a))?;
        let inner = &(&t1.adjoint() * &t2) - &left_action(f, &f.corr.inner(&x1, &x2))?;
        let inner_scale = 1.0 + operator_norm(&t1) * operator_norm(&t2);
        res.left = res.left.max(operator_norm(&f.truncate(&left, top)) / scale);
        res.right = res.right.max(operator_norm(&f.truncate(&right, top)) / scale);
        res.inner = res.inner.max(operator_norm(&f.truncate(&inner, top)) / inner_scale);
    }
    Ok(res)
}

/// Largest covariance defect over seeded samples (see [`covariance_residuals`]).
pub fn covariance_check(f: &TruncatedFockSpace, samples: usize, cfg: &ToleranceConfig) -> Result<f64> {
    Ok(covariance_residuals(f, samples, cfg)?.max())
}

/// `I − Σ_e t(δ_e) t(δ_e)*` for a graph-type Fock space.
pub fn row_defect(f: &TruncatedFockSpace) -> Result<ComplexMatrix> {
    let n = f.dim();
    let mut sum = ComplexMatrix::zeros(n, n);
    for k in 0..f.corr.x_dim() {
        let t = creation(f, &XElement::delta(f.corr.x_dim(), k))?;
        sum += &(&t * &t.adjoint());
    }
    Ok(&ComplexMatrix::identity(n) - &sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eig, psd_check};

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn loop_creation_is_truncated_shift() {
        let f = TruncatedFockSpace::new(Correspondence::Graph(Graph::bouquet(1)), 3).unwrap();
        assert_eq!(f.dim(), 4);
        let t = creation(&f, &XElement::delta(1, 0)).unwrap();
        let shift = ComplexMatrix::from_fn(4, 4, |i, j| if i == j + 1 { C_ONE } else { C_ZERO });
        assert_eq!(t, shift);
        assert!((operator_norm(&t) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_creation_and_zero() {
        let f = TruncatedFockSpace::new(Correspondence::Free(2), 1).unwrap();
        assert_eq!(f.dim(), 3);
        let t = creation(&f, &XElement::delta(2, 0)).unwrap();
        assert_eq!(t[(1, 0)], C_ONE);
        assert!((operator_norm(&t) - 1.0).abs() < 1e-12);
        assert!(creation(&f, &XElement::new(vec![C_ZERO; 2])).unwrap().is_zero(0.0));
        assert!(matches!(
            creation(&f, &XElement::new(vec![C_ZERO; 3])),
            Err(Error::ElementOutsideX(_))
        ));
    }

    #[test]
    fn vertex_projection() {
        let g = Graph::parse("vertex u\nvertex v\nedge e u v\nedge f v u\n").unwrap();
        let f = TruncatedFockSpace::new(Correspondence::Graph(g), 2).unwrap();
        let p = left_action(&f, &AElement::from_scalars(&[C_ZERO, C_ONE])).unwrap();
        // Paths with range v: the vertex v, e (u→v), and ef.
        let expected: Vec<bool> = (0..=2)
            .flat_map(|k| f.paths(k).unwrap().iter().map(|(r, _)| *r == 1).collect::<Vec<_>>())
            .collect();
        for (i, want) in expected.iter().enumerate() {
            assert_eq!(p[(i, i)], if *want { C_ONE } else { C_ZERO });
        }
        assert_eq!(expected.iter().filter(|b| **b).count(), 3);
        let id = left_action(&f, &AElement::from_scalars(&[C_ONE, C_ONE])).unwrap();
        assert_eq!(id, ComplexMatrix::identity(f.dim()));
    }

    #[test]
    fn self_over_matrix_algebra_is_faithful() {
        let alg = FiniteCStarAlgebra::uniform(vec![2]).unwrap();
        let f = TruncatedFockSpace::new(Correspondence::SelfOverA(alg.clone()), 2).unwrap();
        let mut rng = rng_for(3, 0);
        let a = alg.random_element(&mut rng);
        let la = left_action(&f, &a).unwrap();
        assert!((operator_norm(&la) - a.norm()).abs() < 1e-10);
        assert!(covariance_check(&f, 10, &cfg()).unwrap() < 1e-12);
    }

    #[test]
    fn graph_covariance_examples() {
        let g = Graph::parse("vertex u\nvertex v\nedge e u v\nedge f u u\n").unwrap();
        let f = TruncatedFockSpace::new(Correspondence::Graph(g), 3).unwrap();
        let te = creation(&f, &XElement::delta(2, 0)).unwrap();
        let tf = creation(&f, &XElement::delta(2, 1)).unwrap();
        assert!((&te.adjoint() * &tf).is_zero(0.0));
        let lhs = f.truncate(&(&te.adjoint() * &te), 2);
        let rhs = f.truncate(&left_action(&f, &AElement::from_scalars(&[C_ONE, C_ZERO])).unwrap(), 2);
        assert!(lhs.dist(&rhs) < 1e-15);
        let small = TruncatedFockSpace::new(f.correspondence().clone(), 1).unwrap();
        assert!(matches!(
            covariance_check(&small, 1, &cfg()),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn free_row_contraction() {
        let f = TruncatedFockSpace::new(Correspondence::Free(2), 3).unwrap();
        let d = row_defect(&f).unwrap();
        assert!(psd_check(&d, &cfg()).unwrap());
        // I − Σ L_k L_k* is the projection onto the vacuum.
        let eig = hermitian_eig(&d, &cfg()).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!(eig.values[1].abs() < 1e-14);
    }

    #[test]
    fn algebra_validation() {
        assert!(FiniteCStarAlgebra::new(vec![2], vec![0.5]).is_err());
        assert!(FiniteCStarAlgebra::new(vec![2, 1], vec![1.0, 0.0]).is_err());
        assert!(FiniteCStarAlgebra::new(vec![], vec![]).is_err());
        let a = FiniteCStarAlgebra::new(vec![2, 1], vec![0.25, 0.75]).unwrap();
        assert_eq!(a.dim(), 5);
        assert!((a.trace(&a.one()).re - 1.0).abs() < 1e-15);
    }
}
