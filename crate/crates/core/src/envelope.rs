//! C*-envelopes of unital subspaces of finite-dimensional C*-algebras.
//!
//! `C*(S)` is split into simple summands; the Shilov ideal is the largest set of
//! summands whose deletion is completely isometric on `S`, found by estimating the
//! complete-isometry deficit of each candidate deletion.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, kernel, operator_norm,
    random::{random_matrix, rng_for},
    top_singular, vdot, ComplexMatrix, ToleranceConfig, C_ONE,
};
use crate::opalg::{generate_algebra_in, FiniteOperatorAlgebra, MatrixSpan};

/// Seeded samples shared by every candidate deletion of one search.
pub const POOL_SAMPLES: usize = 10_000;

/// Subspace-enumeration limit; larger decompositions are searched greedily.
pub const EXHAUSTIVE_LIMIT: usize = 12;

/// Unital subspace `S ⊂ M_m` with a Frobenius-orthonormal basis whose first element is `I/√m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitalSubspace {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
    contains_identity: bool,
}

impl UnitalSubspace {
    /// Span of `spanning` and `I`; `contains_identity` records whether `I` was already present.
    pub fn new(ambient_dim: usize, spanning: &[ComplexMatrix], cfg: &ToleranceConfig) -> Result<Self> {
        for (k, s) in spanning.iter().enumerate() {
            if s.shape() != (ambient_dim, ambient_dim) {
                return Err(Error::DimensionMismatch(format!(
                    "spanning element {k} has shape {:?}, expected {ambient_dim}x{ambient_dim}",
                    s.shape()
                )));
            }
        }
        let mut plain = MatrixSpan::new(ambient_dim, cfg.structural_tol);
        for s in spanning {
            push_normalized(&mut plain, s);
        }
        let id = ComplexMatrix::identity(ambient_dim).scale_real(1.0 / (ambient_dim.max(1) as f64).sqrt());
        let contains_identity = !plain.clone().push(&id);
        let mut span = MatrixSpan::new(ambient_dim, cfg.structural_tol);
        span.push(&id);
        for s in spanning {
            push_normalized(&mut span, s);
        }
        Ok(Self {
            ambient_dim,
            basis: span.into_basis(),
            contains_identity,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn contains_identity(&self) -> bool {
        self.contains_identity
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.basis {
            out += &b.scale(crate::linalg::random::random_complex(rng));
        }
        out
    }
}

fn push_normalized(span: &mut MatrixSpan, m: &ComplexMatrix) -> bool {
    let n = m.frobenius_norm();
    n > 0.0 && span.push(&m.scale_real(1.0 / n))
}

/// `span{1, z}` with `z = diag(ω⁰, …, ω^{N−1})`, `ω = e^{2πi/N}`.
pub fn roots_of_unity_subspace(n: usize, cfg: &ToleranceConfig) -> Result<UnitalSubspace> {
    let z = ComplexMatrix::diag(
        &(0..n)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect::<Vec<_>>(),
    );
    UnitalSubspace::new(n, &[ComplexMatrix::identity(n), z], cfg)
}

/// All of `M_m`.
pub fn full_matrix_subspace(m: usize, cfg: &ToleranceConfig) -> Result<UnitalSubspace> {
    let units: Vec<_> = (0..m * m).map(|k| ComplexMatrix::unit(m, k / m, k % m)).collect();
    UnitalSubspace::new(m, &units, cfg)
}

/// `{a ⊕ a₁₁ : a ∈ M₂} ⊂ M₃`; `C*(S) = M₂ ⊕ ℂ` and the `ℂ` summand is deletable.
pub fn corner_subspace(cfg: &ToleranceConfig) -> Result<UnitalSubspace> {
    let mut gens = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            let mut b = ComplexMatrix::unit(3, i, j);
            if i == 0 && j == 0 {
                b[(2, 2)] = C_ONE;
            }
            gens.push(b);
        }
    }
    UnitalSubspace::new(3, &gens, cfg)
}

/// `{a ⊕ a : a ∈ M₂} ⊂ M₄`.
pub fn mirror_subspace(cfg: &ToleranceConfig) -> Result<UnitalSubspace> {
    let gens: Vec<_> = (0..4)
        .map(|k| {
            let u = ComplexMatrix::unit(2, k / 2, k % 2);
            ComplexMatrix::direct_sum(&[&u, &u])
        })
        .collect();
    UnitalSubspace::new(4, &gens, cfg)
}

/// Smallest unital *-algebra containing `S`.
pub fn generate_cstar(s: &UnitalSubspace, cfg: &ToleranceConfig) -> Result<FiniteOperatorAlgebra> {
    let mut gens = Vec::with_capacity(2 * s.dim());
    for b in &s.basis {
        gens.push(b.clone());
        gens.push(b.adjoint());
    }
    generate_algebra_in(s.ambient_dim, &gens, true, cfg)
}

/// Central projections of a unital *-algebra with the sizes of its simple summands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    pub central_projections: Vec<ComplexMatrix>,
    /// `dᵢ` with summand `i ≅ M_{dᵢ}`.
    pub block_dims: Vec<usize>,
    /// How many times summand `i` is repeated in the ambient space.
    pub multiplicities: Vec<usize>,
    /// Unitary whose consecutive column groups span the ranges of the central projections.
    pub change_of_basis: ComplexMatrix,
}

impl BlockDecomposition {
    pub fn len(&self) -> usize {
        self.block_dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_dims.is_empty()
    }

    pub fn rank(&self, i: usize) -> usize {
        self.block_dims[i] * self.multiplicities[i]
    }

    /// Isometry onto the range of the `i`-th central projection.
    pub fn summand_isometry(&self, i: usize) -> ComplexMatrix {
        let offset: usize = (0..i).map(|k| self.rank(k)).sum();
        self.change_of_basis
            .submatrix(0, offset, self.change_of_basis.rows(), self.rank(i))
    }
}

/// Center of `A` from `[z, a] = 0`, then spectral splitting of a seeded Hermitian central element.
pub fn block_decompose(a: &FiniteOperatorAlgebra, cfg: &ToleranceConfig) -> Result<BlockDecomposition> {
    if !a.is_star_closed(cfg) {
        return Err(Error::NotStarClosed {
            residual: a.star_residual(),
        });
    }
    if !a.is_unital() {
        return Err(Error::NotUnital);
    }
    let basis = a.basis();
    let images: Vec<Vec<Complex64>> = basis
        .iter()
        .map(|z| basis.iter().flat_map(|b| z.commutator(b).into_vec()).collect())
        .collect();
    let center: Vec<ComplexMatrix> = kernel(&images, cfg.structural_tol)
        .iter()
        .map(|c| a.element(c))
        .collect();
    let blocks = center.len().max(1);

    let mut last_err = None;
    for attempt in 0..2u64 {
        match split_center(a, &center, blocks, attempt, cfg) {
            Ok(d) => return Ok(d),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("two attempts"))
}

fn split_center(
    a: &FiniteOperatorAlgebra,
    center: &[ComplexMatrix],
    blocks: usize,
    attempt: u64,
    cfg: &ToleranceConfig,
) -> Result<BlockDecomposition> {
    let m = a.ambient_dim();
    let mut rng = rng_for(cfg.rng_seed, 0xb10c + attempt);
    let mut h = ComplexMatrix::zeros(m, m);
    for z in center {
        let g = crate::linalg::random::random_complex(&mut rng);
        h += &z.scale(g);
    }
    let h = h.hermitian_part();
    let eig = hermitian_eig(&h, cfg)?;
    let spread = eig.values.first().copied().unwrap_or(0.0) - eig.values.last().copied().unwrap_or(0.0);
    let scale = 1.0 + spread.abs();

    // Cut at the (blocks − 1) widest gaps between consecutive eigenvalues.
    let mut gaps: Vec<(f64, usize)> = (1..m).map(|k| (eig.values[k - 1] - eig.values[k], k)).collect();
    gaps.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let chosen = &gaps[..blocks - 1];
    let smallest_cut = chosen.iter().map(|g| g.0).fold(f64::INFINITY, f64::min);
    let largest_rest = gaps[blocks - 1..].iter().map(|g| g.0).fold(0.0, f64::max);
    if blocks > 1 && (smallest_cut <= 1e3 * cfg.structural_tol * scale || largest_rest > 1e-6 * scale) {
        return Err(Error::Decomposition(format!(
            "central element does not separate {blocks} summands (cut gap {smallest_cut:.3e}, residual spread {largest_rest:.3e})"
        )));
    }
    let mut cuts: Vec<usize> = chosen.iter().map(|g| g.1).collect();
    cuts.sort_unstable();
    cuts.push(m);

    let mut summands = Vec::with_capacity(blocks);
    let mut start = 0;
    for &end in &cuts {
        let cols: Vec<Vec<Complex64>> = (start..end).map(|k| eig.vector(k)).collect();
        let u = ComplexMatrix::from_columns(m, &cols);
        let p = &u * &u.adjoint();
        let mut span = MatrixSpan::new(m, cfg.structural_tol);
        for b in a.basis() {
            push_normalized(&mut span, &(b * &p));
        }
        let dim = span.len();
        let d = (dim as f64).sqrt().round() as usize;
        let rank = end - start;
        if d == 0 || d * d != dim || rank % d != 0 {
            return Err(Error::Decomposition(format!(
                "summand of rank {rank} carries a {dim}-dimensional piece of the algebra"
            )));
        }
        let key = (0..m).find(|&k| p[(k, k)].re > 1e-6).unwrap_or(m);
        summands.push((key, d, rank / d, p, cols));
        start = end;
    }
    let total: usize = summands.iter().map(|s| s.1 * s.1).sum();
    if total != a.dim() {
        return Err(Error::Decomposition(format!(
            "summand dimensions add up to {total}, the algebra has dimension {}",
            a.dim()
        )));
    }
    for (_, _, _, p, _) in &summands {
        let worst = a.basis().iter().map(|b| p.commutator(b).max_abs()).fold(0.0, f64::max);
        if worst > 1e3 * cfg.structural_tol {
            return Err(Error::Decomposition(format!(
                "projection fails to be central (residual {worst:.3e})"
            )));
        }
    }
    summands.sort_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)));
    let mut columns = Vec::with_capacity(m);
    let mut out = BlockDecomposition {
        central_projections: Vec::new(),
        block_dims: Vec::new(),
        multiplicities: Vec::new(),
        change_of_basis: ComplexMatrix::zeros(m, m),
    };
    for (_, d, mult, p, cols) in summands {
        out.central_projections.push(p);
        out.block_dims.push(d);
        out.multiplicities.push(mult);
        columns.extend(cols);
    }
    out.change_of_basis = ComplexMatrix::from_columns(m, &columns);
    Ok(out)
}

/// Estimate of the complete-isometry deficit of one deletion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitEstimate {
    /// Summands kept by the quotient.
    pub retained: Vec<usize>,
    /// Max over the sample pool and optimizer endpoints of `1 − ‖q(A)‖/‖A‖`.
    pub deficit: f64,
    /// Starts whose endpoint agrees with `deficit` within `norm_tol`; zero when
    /// the optimizer was not needed.
    pub confidence: usize,
    pub starts: usize,
    /// Deficit in `(norm_tol, 10·norm_tol]`: reported, not decided.
    pub borderline: bool,
    pub levels: usize,
}

impl DeficitEstimate {
    /// Zero deficit with full agreement of every optimizer start.
    pub fn is_zero(&self, cfg: &ToleranceConfig) -> bool {
        self.deficit <= cfg.norm_tol && self.confidence == self.starts
    }
}

/// A unital subspace with `C*(S)`, its decomposition and the shared sample pool.
#[derive(Debug, Clone)]
pub struct EnvelopeContext {
    subspace: UnitalSubspace,
    algebra: FiniteOperatorAlgebra,
    decomposition: BlockDecomposition,
    levels: usize,
    /// `U_i* s_k U_i` per summand `i` and basis element `k`.
    compressed: Vec<Vec<ComplexMatrix>>,
    /// Summand norms `‖π_i^{(d)}(A)‖` of every pooled sample.
    pool: Vec<Vec<f64>>,
    cfg: ToleranceConfig,
}

struct Evaluation {
    norms: Vec<f64>,
    singular: Vec<(Vec<Complex64>, Vec<Complex64>)>,
}

impl EnvelopeContext {
    /// Context with the level cap `min(m, Σ dᵢ)`.
    pub fn new(s: &UnitalSubspace, cfg: &ToleranceConfig) -> Result<Self> {
        Self::with_levels(s, None, cfg)
    }

    pub fn with_levels(s: &UnitalSubspace, levels: Option<usize>, cfg: &ToleranceConfig) -> Result<Self> {
        cfg.validate()?;
        let algebra = generate_cstar(s, cfg)?;
        let decomposition = block_decompose(&algebra, cfg)?;
        let total: usize = decomposition.block_dims.iter().sum();
        let levels = levels.unwrap_or(s.ambient_dim.min(total)).max(1);
        let compressed = (0..decomposition.len())
            .map(|i| {
                let u = decomposition.summand_isometry(i);
                s.basis.iter().map(|b| b.compress(&u)).collect()
            })
            .collect();
        let mut ctx = Self {
            subspace: s.clone(),
            algebra,
            decomposition,
            levels,
            compressed,
            pool: Vec::new(),
            cfg: *cfg,
        };
        ctx.pool = (0..POOL_SAMPLES)
            .into_par_iter()
            .map(|j| {
                let mut rng = rng_for(cfg.rng_seed, 0x9001_0000 + j as u64);
                let d = 1 + j % ctx.levels;
                let coeffs = ctx.random_coefficients(d, &mut rng);
                ctx.summand_norms(&coeffs)
            })
            .collect();
        Ok(ctx)
    }

    pub fn subspace(&self) -> &UnitalSubspace {
        &self.subspace
    }

    pub fn algebra(&self) -> &FiniteOperatorAlgebra {
        &self.algebra
    }

    pub fn decomposition(&self) -> &BlockDecomposition {
        &self.decomposition
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn pool_size(&self) -> usize {
        self.pool.len()
    }

    fn random_coefficients<R: Rng + ?Sized>(&self, d: usize, rng: &mut R) -> Vec<ComplexMatrix> {
        (0..self.subspace.dim()).map(|_| random_matrix(d, d, rng)).collect()
    }

    fn summand_matrix(&self, i: usize, coeffs: &[ComplexMatrix]) -> ComplexMatrix {
        let d = coeffs[0].rows();
        let r = self.decomposition.rank(i);
        let mut out = ComplexMatrix::zeros(d * r, d * r);
        for (c, s) in coeffs.iter().zip(&self.compressed[i]) {
            out += &c.kron(s);
        }
        out
    }

    fn summand_norms(&self, coeffs: &[ComplexMatrix]) -> Vec<f64> {
        (0..self.decomposition.len())
            .map(|i| operator_norm(&self.summand_matrix(i, coeffs)))
            .collect()
    }

    fn evaluate(&self, coeffs: &[ComplexMatrix]) -> Evaluation {
        let mut norms = Vec::new();
        let mut singular = Vec::new();
        for i in 0..self.decomposition.len() {
            let m = self.summand_matrix(i, coeffs);
            let (sigma, v) = top_singular(&m);
            let mut u = m.matvec(&v);
            if sigma > 0.0 {
                for z in &mut u {
                    *z /= sigma;
                }
            }
            norms.push(sigma);
            singular.push((u, v));
        }
        Evaluation { norms, singular }
    }

    /// `max_R n / max_all n` deficit of one norm vector.
    fn sample_deficit(norms: &[f64], retained: &[bool]) -> f64 {
        let all = norms.iter().copied().fold(0.0, f64::max);
        if all == 0.0 {
            return 0.0;
        }
        let kept = norms
            .iter()
            .zip(retained)
            .filter(|(_, r)| **r)
            .map(|(n, _)| *n)
            .fold(0.0, f64::max);
        (1.0 - kept / all).max(0.0)
    }

    /// Deficit of a deletion over the current pool.
    pub fn pool_deficit(&self, retained: &[bool]) -> f64 {
        self.pool
            .iter()
            .map(|n| Self::sample_deficit(n, retained))
            .fold(0.0, f64::max)
    }

    fn mask(&self, retained: &[usize]) -> Result<Vec<bool>> {
        if retained.is_empty() {
            return Err(Error::EmptyRetention);
        }
        let mut mask = vec![false; self.decomposition.len()];
        for &i in retained {
            if i >= mask.len() {
                return Err(Error::InvalidConfig(format!(
                    "summand {i} requested, C*(S) has {} summands",
                    mask.len()
                )));
            }
            mask[i] = true;
        }
        Ok(mask)
    }

    /// Gradient ascent of `log n_deleted − log n_retained` from one seeded start.
    fn ascend(&self, retained: &[bool], start: usize) -> Vec<f64> {
        let mut rng = rng_for(self.cfg.rng_seed, 0xa5ce_0000 + start as u64);
        let d = 1 + start % self.levels;
        let mut coeffs = self.random_coefficients(d, &mut rng);
        let objective = |e: &Evaluation| -> (f64, usize, usize) {
            let pick = |want: bool| {
                (0..e.norms.len())
                    .filter(|&i| retained[i] == want)
                    .max_by(|&x, &y| e.norms[x].total_cmp(&e.norms[y]).then(y.cmp(&x)))
                    .expect("both sides nonempty")
            };
            let (j, r) = (pick(false), pick(true));
            ((e.norms[j].max(1e-300)).ln() - (e.norms[r].max(1e-300)).ln(), j, r)
        };
        let mut eval = self.evaluate(&coeffs);
        let (mut f, mut j, mut r) = objective(&eval);
        let mut step = 0.25;
        for _ in 0..self.cfg.opt_iters {
            let grad_j = self.gradient(j, &coeffs, &eval);
            let grad_r = self.gradient(r, &coeffs, &eval);
            let grad: Vec<ComplexMatrix> = grad_j
                .iter()
                .zip(&grad_r)
                .map(|(gj, gr)| {
                    &gj.scale_real(1.0 / eval.norms[j].max(1e-300)) - &gr.scale_real(1.0 / eval.norms[r].max(1e-300))
                })
                .collect();
            let gnorm = grad.iter().map(|g| g.frobenius_norm().powi(2)).sum::<f64>().sqrt();
            let cnorm = coeffs.iter().map(|c| c.frobenius_norm().powi(2)).sum::<f64>().sqrt();
            if gnorm * cnorm < 1e-13 {
                break;
            }
            let mut improved = false;
            for _ in 0..30 {
                let t = step * cnorm / gnorm;
                let trial: Vec<ComplexMatrix> = coeffs.iter().zip(&grad).map(|(c, g)| c + &g.scale_real(t)).collect();
                let e = self.evaluate(&trial);
                let (ft, jt, rt) = objective(&e);
                if ft > f {
                    improved = ft - f > 1e-13 * (1.0 + f.abs());
                    coeffs = trial;
                    eval = e;
                    (f, j, r) = (ft, jt, rt);
                    step = (step * 1.5).min(1.0);
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        eval.norms
    }

    /// `∂σ_i / ∂C_k[p,q] = conj(u_p* S_k v_q)` for the top singular pair of summand `i`.
    fn gradient(&self, i: usize, coeffs: &[ComplexMatrix], eval: &Evaluation) -> Vec<ComplexMatrix> {
        let d = coeffs[0].rows();
        let r = self.decomposition.rank(i);
        let (u, v) = &eval.singular[i];
        self.compressed[i]
            .iter()
            .map(|s| {
                let sv: Vec<Vec<Complex64>> = (0..d).map(|q| s.matvec(&v[q * r..(q + 1) * r])).collect();
                ComplexMatrix::from_fn(d, d, |p, q| vdot(&u[p * r..(p + 1) * r], &sv[q]).conj())
            })
            .collect()
    }

    /// Runs the multi-start optimizer for a deletion, adds the endpoints to the pool and
    /// reports the agreeing starts.
    fn optimize(&mut self, retained: &[bool]) -> usize {
        let starts = self.cfg.opt_starts;
        let endpoints: Vec<Vec<f64>> = (0..starts).into_par_iter().map(|s| self.ascend(retained, s)).collect();
        let agreeing = endpoints
            .iter()
            .filter(|n| Self::sample_deficit(n, retained) <= self.cfg.norm_tol)
            .count();
        self.pool.extend(endpoints);
        agreeing
    }

    /// Deficit of keeping only `retained`; the optimizer runs when the pool alone
    /// cannot rule out a zero deficit.
    pub fn deficit(&mut self, retained: &[usize]) -> Result<DeficitEstimate> {
        let mask = self.mask(retained)?;
        let (confidence, starts) = self.gated_optimize(&mask);
        Ok(self.estimate(&mask, confidence, starts))
    }

    fn gated_optimize(&mut self, mask: &[bool]) -> (usize, usize) {
        let deletes_something = mask.iter().any(|r| !r);
        if deletes_something && self.pool_deficit(mask) <= 10.0 * self.cfg.norm_tol {
            (self.optimize(mask), self.cfg.opt_starts)
        } else {
            (0, 0)
        }
    }

    fn estimate(&self, mask: &[bool], confidence: usize, starts: usize) -> DeficitEstimate {
        let deficit = self.pool_deficit(mask);
        let tol = self.cfg.norm_tol;
        DeficitEstimate {
            retained: (0..mask.len()).filter(|&i| mask[i]).collect(),
            deficit,
            confidence,
            starts,
            borderline: deficit > tol && deficit <= 10.0 * tol,
            levels: self.levels,
        }
    }
}

/// Deficit of the quotient onto the `retained` summands of `C*(S)`, tested at levels `≤ levels`.
pub fn complete_isometry_deficit(
    s: &UnitalSubspace,
    retained: &[usize],
    levels: usize,
    cfg: &ToleranceConfig,
) -> Result<DeficitEstimate> {
    if retained.is_empty() {
        return Err(Error::EmptyRetention);
    }
    let mut ctx = EnvelopeContext::with_levels(s, Some(levels), cfg)?;
    ctx.deficit(retained)
}

/// Outcome of the Shilov search over deletions of central summands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShilovResult {
    pub block_dims: Vec<usize>,
    pub multiplicities: Vec<usize>,
    pub deletable: Vec<usize>,
    pub envelope_dims: Vec<usize>,
    /// Every deletion evaluated, with its final estimate.
    pub deletions: Vec<(Vec<usize>, DeficitEstimate)>,
    /// Every strictly larger deletion has a nonzero deficit.
    pub maximal: bool,
    /// Every zero-deficit deletion is contained in the returned one (exhaustive searches only).
    pub unique_maximal: Option<bool>,
    pub exhaustive: bool,
    pub levels: usize,
    /// Some deficit fell in the undecided band `(norm_tol, 10·norm_tol]`.
    pub flagged: bool,
}

fn deleted_of(mask: u64, c: usize) -> Vec<usize> {
    (0..c).filter(|&i| mask >> i & 1 == 1).collect()
}

fn retained_mask(mask: u64, c: usize) -> Vec<bool> {
    (0..c).map(|i| mask >> i & 1 == 0).collect()
}

/// Largest deletion of central summands of `C*(S)` that is completely isometric on `S`.
pub fn shilov_ideal_search(s: &UnitalSubspace, cfg: &ToleranceConfig) -> Result<ShilovResult> {
    let mut ctx = EnvelopeContext::new(s, cfg)?;
    shilov_search_in(&mut ctx)
}

/// [`shilov_ideal_search`] on a prepared context, reusing and extending its pool.
pub fn shilov_search_in(ctx: &mut EnvelopeContext) -> Result<ShilovResult> {
    let c = ctx.decomposition.len();
    let cfg = ctx.cfg;
    let full: u64 = if c >= 64 { u64::MAX } else { (1u64 << c) - 1 };
    let exhaustive = c <= EXHAUSTIVE_LIMIT;
    let mut confidence: std::collections::BTreeMap<u64, (usize, usize)> = Default::default();

    let candidates: Vec<u64> = if exhaustive { (0..full).collect() } else { Vec::new() };
    let chosen = if exhaustive {
        for &mask in &candidates {
            let r = ctx.gated_optimize(&retained_mask(mask, c));
            confidence.insert(mask, r);
        }
        let ok = |mask: u64, conf: &std::collections::BTreeMap<u64, (usize, usize)>, ctx: &EnvelopeContext| {
            let (agree, starts) = conf[&mask];
            ctx.estimate(&retained_mask(mask, c), agree, starts).is_zero(&cfg)
        };
        let mut best = 0u64;
        for &mask in &candidates {
            let better = mask.count_ones() > best.count_ones()
                || (mask.count_ones() == best.count_ones() && deleted_of(mask, c) < deleted_of(best, c));
            if better && ok(mask, &confidence, ctx) {
                best = mask;
            }
        }
        best
    } else {
        let mut order: Vec<usize> = (0..c).collect();
        order.sort_by(|&x, &y| {
            ctx.decomposition.block_dims[y]
                .cmp(&ctx.decomposition.block_dims[x])
                .then(x.cmp(&y))
        });
        let mut current = 0u64;
        for i in order {
            let trial = current | (1u64 << i);
            if trial == full {
                continue;
            }
            let r = ctx.gated_optimize(&retained_mask(trial, c));
            confidence.insert(trial, r);
            if ctx.estimate(&retained_mask(trial, c), r.0, r.1).is_zero(&cfg) {
                current = trial;
            }
        }
        current
    };

    // Maximality: every one-step enlargement must be rejected (monotone deficits cover the rest).
    let mut maximal = true;
    for i in 0..c {
        let trial = chosen | (1u64 << i);
        if trial == chosen || trial == full {
            continue;
        }
        let r = match confidence.get(&trial) {
            Some(r) => *r,
            None => {
                let r = ctx.gated_optimize(&retained_mask(trial, c));
                confidence.insert(trial, r);
                r
            }
        };
        if ctx.estimate(&retained_mask(trial, c), r.0, r.1).is_zero(&cfg) {
            maximal = false;
        }
    }

    let deletions: Vec<(Vec<usize>, DeficitEstimate)> = confidence
        .iter()
        .map(|(&mask, &(agree, starts))| {
            (
                deleted_of(mask, c),
                ctx.estimate(&retained_mask(mask, c), agree, starts),
            )
        })
        .collect();
    let unique_maximal = exhaustive.then(|| {
        deletions
            .iter()
            .zip(confidence.keys())
            .all(|((_, est), &mask)| !est.is_zero(&cfg) || mask & !chosen == 0)
    });
    let flagged = deletions.iter().any(|(_, e)| e.borderline);
    let deletable = deleted_of(chosen, c);
    let envelope_dims = (0..c)
        .filter(|i| !deletable.contains(i))
        .map(|i| ctx.decomposition.block_dims[i])
        .collect();
    Ok(ShilovResult {
        block_dims: ctx.decomposition.block_dims.clone(),
        multiplicities: ctx.decomposition.multiplicities.clone(),
        deletable,
        envelope_dims,
        deletions,
        maximal,
        unique_maximal,
        exhaustive,
        levels: ctx.levels,
        flagged,
    })
}

/// Image of `S` in the quotient of `C*(S)` keeping the `retained` summands, realized on
/// the ranges of their central projections.
pub fn quotient_subspace(ctx: &EnvelopeContext, retained: &[usize], cfg: &ToleranceConfig) -> Result<UnitalSubspace> {
    ctx.mask(retained)?;
    let dec = ctx.decomposition();
    let m = ctx.subspace.ambient_dim;
    let cols: Vec<Vec<Complex64>> = retained
        .iter()
        .flat_map(|&i| {
            let u = dec.summand_isometry(i);
            (0..u.cols()).map(move |k| u.col(k))
        })
        .collect();
    let u = ComplexMatrix::from_columns(m, &cols);
    let images: Vec<ComplexMatrix> = ctx.subspace.basis.iter().map(|b| b.compress(&u)).collect();
    UnitalSubspace::new(u.cols(), &images, cfg)
}

/// `A_S = {[[λI, s], [0, μI]]} ⊂ M_{2m}`.
pub fn build_a_s(s: &UnitalSubspace, cfg: &ToleranceConfig) -> Result<UnitalSubspace> {
    let m = s.ambient_dim;
    let id = ComplexMatrix::identity(m);
    let zero = ComplexMatrix::zeros(m, m);
    let mut gens = vec![
        ComplexMatrix::direct_sum(&[&id, &zero]),
        ComplexMatrix::direct_sum(&[&zero, &id]),
    ];
    for b in &s.basis {
        let mut x = ComplexMatrix::zeros(2 * m, 2 * m);
        x.set_block(0, m, b);
        gens.push(x);
    }
    UnitalSubspace::new(2 * m, &gens, cfg)
}

/// Shilov searches on `S` and `A_S` with their summand correspondence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct M2EnvelopeReport {
    pub s: ShilovResult,
    pub a_s: ShilovResult,
    pub cstar_dim_s: usize,
    pub cstar_dim_a_s: usize,
    /// For each summand of `C*(A_S)`, the summand `i` of `C*(S)` with projection `I₂ ⊗ pᵢ`.
    pub matching: Vec<Option<usize>>,
    /// Envelope dims of `A_S` are twice those of `S`, summand by summand.
    pub doubled: bool,
    /// `A_S` deletes exactly the summands matched to deletions of `S`.
    pub deletions_match: bool,
}

impl M2EnvelopeReport {
    pub fn passed(&self) -> bool {
        self.doubled
            && self.deletions_match
            && self.cstar_dim_a_s == 4 * self.cstar_dim_s
            && !self.s.flagged
            && !self.a_s.flagged
    }
}

fn match_projections(big: &[ComplexMatrix], small: &[ComplexMatrix]) -> Vec<Option<usize>> {
    let id2 = ComplexMatrix::identity(2);
    big.iter()
        .map(|p| {
            small
                .iter()
                .position(|q| p.dist(&id2.kron(q)) <= 1e-6 * (1.0 + p.frobenius_norm()))
        })
        .collect()
}

/// Envelope-doubling check `C*_e(A_S) ≅ M₂(C*_e(S))`.
pub fn m2_envelope_check(s: &UnitalSubspace, cfg: &ToleranceConfig) -> Result<M2EnvelopeReport> {
    let a_s = build_a_s(s, cfg)?;
    let mut ctx_s = EnvelopeContext::new(s, cfg)?;
    let mut ctx_a = EnvelopeContext::new(&a_s, cfg)?;
    let rs = shilov_search_in(&mut ctx_s)?;
    let ra = shilov_search_in(&mut ctx_a)?;
    let matching = match_projections(
        &ctx_a.decomposition.central_projections,
        &ctx_s.decomposition.central_projections,
    );
    let bijective = matching.len() == rs.block_dims.len() && {
        let mut seen: Vec<Option<usize>> = matching.clone();
        seen.sort();
        seen.dedup();
        seen.len() == matching.len() && seen.iter().all(|x| x.is_some())
    };
    let doubled = bijective
        && matching
            .iter()
            .enumerate()
            .all(|(j, i)| ra.block_dims[j] == 2 * rs.block_dims[i.expect("bijective")])
        && {
            let mut a: Vec<usize> = ra.envelope_dims.clone();
            let mut b: Vec<usize> = rs.envelope_dims.iter().map(|d| 2 * d).collect();
            a.sort_unstable();
            b.sort_unstable();
            a == b
        };
    let deletions_match = bijective && {
        let mut mapped: Vec<usize> = ra.deletable.iter().map(|&j| matching[j].expect("bijective")).collect();
        mapped.sort_unstable();
        mapped == rs.deletable
    };
    Ok(M2EnvelopeReport {
        cstar_dim_s: ctx_s.algebra.dim(),
        cstar_dim_a_s: ctx_a.algebra.dim(),
        s: rs,
        a_s: ra,
        matching,
        doubled,
        deletions_match,
    })
}

/// `M₂(A)` as an algebra in `M_{2m}`.
pub fn m2_of(a: &FiniteOperatorAlgebra, cfg: &ToleranceConfig) -> Result<FiniteOperatorAlgebra> {
    let mut span = Vec::with_capacity(4 * a.dim());
    for i in 0..2 {
        for j in 0..2 {
            let e = ComplexMatrix::unit(2, i, j);
            for b in a.basis() {
                span.push(e.kron(b));
            }
        }
    }
    FiniteOperatorAlgebra::from_span(2 * a.ambient_dim(), &span, a.is_unital(), cfg)
}

/// Every central projection of `M₂(A)` is `I₂ ⊗ p` for a central projection `p` of `A`.
pub fn ideal_lattice_m2_check(a: &FiniteOperatorAlgebra, cfg: &ToleranceConfig) -> Result<bool> {
    let small = block_decompose(a, cfg)?;
    let big = block_decompose(&m2_of(a, cfg)?, cfg)?;
    let matching = match_projections(&big.central_projections, &small.central_projections);
    let mut hit: Vec<usize> = matching.iter().flatten().copied().collect();
    hit.sort_unstable();
    hit.dedup();
    Ok(matching.iter().all(|m| m.is_some()) && hit.len() == small.len() && big.len() == small.len())
}
