//! Elements of `∏ₙ M_{rₙ}` given by finitely many explicit blocks and an
//! eventually constant tail pattern, with sup norms, quotient norms modulo the
//! blockwise-vanishing ideal, and the two-step nilpotent example built from `T_m`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    ampliate, kernel, operator_norm,
    random::{random_matrix, random_unit_vector, rng_for},
    top_singular, vdot, vnorm, ComplexMatrix, SpanBuilder, SquareArray, ToleranceConfig, C_ONE, C_ZERO,
};

/// Block size rule `n ↦ rₙ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeRule {
    Constant(usize),
    Linear,
}

/// Size rule together with the explicit horizon `N₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockProfile {
    rule: SizeRule,
    horizon: usize,
}

impl BlockProfile {
    pub fn new(rule: SizeRule, horizon: usize) -> Result<Self> {
        if rule == SizeRule::Constant(0) {
            return Err(Error::ProfileMismatch("block sizes must be positive".into()));
        }
        Ok(Self { rule, horizon })
    }

    pub fn constant(r: usize, horizon: usize) -> Result<Self> {
        Self::new(SizeRule::Constant(r), horizon)
    }

    pub fn linear(horizon: usize) -> Self {
        Self {
            rule: SizeRule::Linear,
            horizon,
        }
    }

    pub fn rule(&self) -> SizeRule {
        self.rule
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `rₙ` for `n ≥ 1`.
    pub fn size(&self, n: usize) -> usize {
        match self.rule {
            SizeRule::Constant(r) => r,
            SizeRule::Linear => n,
        }
    }

    /// Largest tail support keeping `‖γₙ‖` constant for every `n > N₁`.
    pub fn max_tail_support(&self) -> usize {
        match self.rule {
            SizeRule::Constant(r) => r,
            SizeRule::Linear => self.horizon,
        }
    }
}

/// Tail pattern `α·I + Σ c_ij E_ij` with fixed (0-based) indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TailTemplate {
    scalar: Complex64,
    entries: BTreeMap<(usize, usize), Complex64>,
}

impl TailTemplate {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn scalar(alpha: Complex64) -> Self {
        Self {
            scalar: alpha,
            entries: BTreeMap::new(),
        }
    }

    pub fn new(alpha: Complex64, entries: &[(usize, usize, Complex64)]) -> Self {
        let mut t = Self::scalar(alpha);
        for &(i, j, c) in entries {
            *t.entries.entry((i, j)).or_insert(C_ZERO) += c;
        }
        t.prune();
        t
    }

    fn prune(&mut self) {
        self.entries.retain(|_, c| *c != C_ZERO);
    }

    pub fn identity_coefficient(&self) -> Complex64 {
        self.scalar
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.entries.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    /// Number of leading coordinates touched by the matrix-unit part.
    pub fn support(&self) -> usize {
        self.entries.keys().map(|&(i, j)| i.max(j) + 1).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.scalar == C_ZERO && self.entries.is_empty()
    }

    /// The pattern realized in `M_r`; entries outside `M_r` are dropped.
    pub fn instantiate(&self, r: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::scalar(r, self.scalar);
        for (&(i, j), &c) in &self.entries {
            if i < r && j < r {
                m[(i, j)] += c;
            }
        }
        m
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.scalar += other.scalar;
        for (&k, &c) in &other.entries {
            *out.entries.entry(k).or_insert(C_ZERO) += c;
        }
        out.prune();
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self {
            scalar: self.scalar * s,
            entries: self.entries.iter().map(|(&k, &c)| (k, c * s)).collect(),
        };
        out.prune();
        out
    }

    /// `(αI + X)(βI + Y) = αβ I + αY + βX + XY` with `E_ij E_kl = δ_jk E_il`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::scalar(self.scalar * other.scalar);
        for (&k, &c) in &other.entries {
            *out.entries.entry(k).or_insert(C_ZERO) += self.scalar * c;
        }
        for (&k, &c) in &self.entries {
            *out.entries.entry(k).or_insert(C_ZERO) += c * other.scalar;
        }
        for (&(i, j), &a) in &self.entries {
            for (&(k, l), &b) in &other.entries {
                if j == k {
                    *out.entries.entry((i, l)).or_insert(C_ZERO) += a * b;
                }
            }
        }
        out.prune();
        out
    }

    pub fn adjoint(&self) -> Self {
        Self {
            scalar: self.scalar.conj(),
            entries: self.entries.iter().map(|(&(i, j), &c)| ((j, i), c.conj())).collect(),
        }
    }
}

/// Element of `∏ₙ M_{rₙ}`: explicit blocks for `n ≤ N₁`, tail template beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockElement {
    profile: BlockProfile,
    explicit: Vec<ComplexMatrix>,
    tail: TailTemplate,
}

impl BlockElement {
    /// `explicit[n-1]` is the block at `n` for `1 ≤ n ≤ N₁`.
    pub fn new(profile: BlockProfile, explicit: Vec<ComplexMatrix>, tail: TailTemplate) -> Result<Self> {
        if explicit.len() != profile.horizon {
            return Err(Error::ProfileMismatch(format!(
                "{} explicit blocks supplied for horizon {}",
                explicit.len(),
                profile.horizon
            )));
        }
        for (k, b) in explicit.iter().enumerate() {
            let r = profile.size(k + 1);
            if b.shape() != (r, r) {
                return Err(Error::ProfileMismatch(format!(
                    "block {} has shape {:?}, expected {r}x{r}",
                    k + 1,
                    b.shape()
                )));
            }
        }
        let support = tail.support();
        if support > profile.max_tail_support() {
            return Err(Error::InvalidTail(format!(
                "tail touches {support} coordinates but at most {} keep the tail norm constant",
                profile.max_tail_support()
            )));
        }
        Ok(Self {
            profile,
            explicit,
            tail,
        })
    }

    /// Element whose explicit blocks are given by `f(n)` and whose tail is `tail`.
    pub fn from_fn(
        profile: BlockProfile,
        tail: TailTemplate,
        mut f: impl FnMut(usize) -> ComplexMatrix,
    ) -> Result<Self> {
        let explicit = (1..=profile.horizon).map(&mut f).collect();
        Self::new(profile, explicit, tail)
    }

    /// Element agreeing with its tail pattern at every block.
    pub fn from_template(profile: BlockProfile, tail: TailTemplate) -> Result<Self> {
        let t = tail.clone();
        Self::from_fn(profile, tail, |n| t.instantiate(profile.size(n)))
    }

    pub fn zero(profile: BlockProfile) -> Self {
        Self::from_template(profile, TailTemplate::zero()).expect("zero tail is always valid")
    }

    pub fn identity(profile: BlockProfile) -> Self {
        Self::from_template(profile, TailTemplate::scalar(C_ONE)).expect("scalar tail is always valid")
    }

    pub fn profile(&self) -> BlockProfile {
        self.profile
    }

    pub fn tail(&self) -> &TailTemplate {
        &self.tail
    }

    pub fn explicit_blocks(&self) -> &[ComplexMatrix] {
        &self.explicit
    }

    /// The block `γₙ(x)` for `n ≥ 1`.
    pub fn gamma(&self, n: usize) -> ComplexMatrix {
        assert!(n >= 1, "blocks are indexed from 1");
        if n <= self.profile.horizon {
            self.explicit[n - 1].clone()
        } else {
            self.tail.instantiate(self.profile.size(n))
        }
    }

    fn same_profile(&self, other: &Self) -> Result<()> {
        if self.profile != other.profile {
            return Err(Error::ProfileMismatch(format!(
                "{:?} versus {:?}",
                self.profile, other.profile
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_profile(other)?;
        Ok(Self {
            profile: self.profile,
            explicit: self.explicit.iter().zip(&other.explicit).map(|(a, b)| a + b).collect(),
            tail: self.tail.add(&other.tail),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-C_ONE))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_profile(other)?;
        Ok(Self {
            profile: self.profile,
            explicit: self.explicit.iter().zip(&other.explicit).map(|(a, b)| a * b).collect(),
            tail: self.tail.mul(&other.tail),
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            profile: self.profile,
            explicit: self.explicit.iter().map(|b| b.scale(s)).collect(),
            tail: self.tail.scale(s),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            profile: self.profile,
            explicit: self.explicit.iter().map(|b| b.adjoint()).collect(),
            tail: self.tail.adjoint(),
        }
    }

    /// Exact zero test (every explicit entry and the tail).
    pub fn is_zero(&self) -> bool {
        self.tail.is_zero() && self.explicit.iter().all(|b| b.is_zero(0.0))
    }

    /// Coordinates: explicit entries, then the tail scalar, then the tail entries on a
    /// `K×K` grid with `K` the profile's tail support bound.
    fn to_vector(&self) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = self
            .explicit
            .iter()
            .flat_map(|b| b.as_slice().iter().copied())
            .collect();
        v.extend(self.tail_vector());
        v
    }

    fn tail_vector(&self) -> Vec<Complex64> {
        let k = self.profile.max_tail_support();
        let mut v = vec![C_ZERO; 1 + k * k];
        v[0] = self.tail.scalar;
        for (&(i, j), &c) in &self.tail.entries {
            v[1 + i * k + j] = c;
        }
        v
    }

    fn from_vector(profile: BlockProfile, v: &[Complex64]) -> Self {
        let mut explicit = Vec::with_capacity(profile.horizon);
        let mut pos = 0;
        for n in 1..=profile.horizon {
            let r = profile.size(n);
            explicit.push(ComplexMatrix::new(r, r, v[pos..pos + r * r].to_vec()).expect("finite coordinates"));
            pos += r * r;
        }
        let k = profile.max_tail_support();
        let mut entries = Vec::new();
        for i in 0..k {
            for j in 0..k {
                entries.push((i, j, v[pos + 1 + i * k + j]));
            }
        }
        let tail = TailTemplate::new(v[pos], &entries);
        Self {
            profile,
            explicit,
            tail,
        }
    }
}

fn common_profile(a: &SquareArray<BlockElement>) -> Result<BlockProfile> {
    let Some(first) = a.entries().first() else {
        return Err(Error::ProfileMismatch("empty array".into()));
    };
    let p = first.profile;
    if let Some(bad) = a.entries().iter().find(|e| e.profile != p) {
        return Err(Error::ProfileMismatch(format!("{:?} versus {:?}", bad.profile, p)));
    }
    Ok(p)
}

/// `γₙ^{(d)}(A)`.
pub fn gamma_array(a: &SquareArray<BlockElement>, n: usize) -> ComplexMatrix {
    ampliate(&a.map(|e| e.gamma(n))).expect("blocks of one element share their size")
}

/// The common value of `‖γₙ^{(d)}(A)‖` for `n > N₁`.
///
/// Under the canonical shuffle the tail block is `(αᵢⱼ + Xᵢⱼ)` on the first `k` coordinates
/// plus copies of the scalar array `(αᵢⱼ)` on the rest.
fn tail_norm(a: &SquareArray<BlockElement>, profile: BlockProfile) -> f64 {
    let k = a.entries().iter().map(|e| e.tail.support()).max().unwrap_or(0);
    let support = ampliate(&a.map(|e| e.tail.instantiate(k))).expect("uniform support");
    let mut norm = operator_norm(&support);
    if profile.size(profile.horizon + 1) > k {
        let scalars = ComplexMatrix::from_fn(a.size(), a.size(), |i, j| a.get(i, j).tail.scalar);
        norm = norm.max(operator_norm(&scalars));
    }
    norm
}

/// `‖A‖ = supₙ ‖γₙ^{(d)}(A)‖`, exact because the tail is constant.
pub fn sup_norm(a: &SquareArray<BlockElement>) -> Result<f64> {
    let profile = common_profile(a)?;
    let explicit = (1..=profile.horizon)
        .map(|n| operator_norm(&gamma_array(a, n)))
        .fold(0.0, f64::max);
    Ok(explicit.max(tail_norm(a, profile)))
}

/// `‖κ^{(d)}(A)‖ = limsupₙ ‖γₙ^{(d)}(A)‖`, the constant tail value.
pub fn quotient_norm(a: &SquareArray<BlockElement>) -> Result<f64> {
    let profile = common_profile(a)?;
    Ok(tail_norm(a, profile))
}

/// `(‖A‖ − ‖κ^{(d)}(A)‖, gap > norm_tol)`.
pub fn strict_kappa_gap(a: &SquareArray<BlockElement>, cfg: &ToleranceConfig) -> Result<(f64, bool)> {
    let gap = sup_norm(a)? - quotient_norm(a)?;
    Ok((gap, gap > cfg.norm_tol))
}

/// Smallest explicit `m ≤ N₁` with `max_{n≤m} ‖γₙ^{(d)}(A)‖ ≥ ‖A‖ − norm_tol`.
///
/// Blocks beyond the horizon encode the limiting behaviour, so a norm carried only by
/// the tail is reported as not attained.
pub fn norm_attaining_block(a: &SquareArray<BlockElement>, cfg: &ToleranceConfig) -> Result<Option<usize>> {
    let profile = common_profile(a)?;
    let sup = sup_norm(a)?;
    Ok((1..=profile.horizon).find(|&n| operator_norm(&gamma_array(a, n)) >= sup - cfg.norm_tol))
}

/// The generator `T_m`: `E_{2m−1,2m}` at block `2m`, half of it beyond, zero before.
pub fn t_generator(m: usize, horizon: usize) -> Result<BlockElement> {
    if m == 0 {
        return Err(Error::InvalidConfig("generators are indexed from 1".into()));
    }
    if horizon < 2 * m {
        return Err(Error::InvalidTail(format!(
            "T_{m} needs a horizon of at least {}",
            2 * m
        )));
    }
    let profile = BlockProfile::linear(horizon);
    let (i, j) = (2 * m - 2, 2 * m - 1);
    let tail = TailTemplate::new(C_ZERO, &[(i, j, Complex64::new(0.5, 0.0))]);
    BlockElement::from_fn(profile, tail, |n| {
        let mut b = ComplexMatrix::zeros(n, n);
        if n == 2 * m {
            b[(i, j)] = C_ONE;
        } else if n > 2 * m {
            b[(i, j)] = Complex64::new(0.5, 0.0);
        }
        b
    })
}

/// `T_1, …, T_r` on the profile `rₙ = n` with horizon `2r`.
pub fn t_generators(r: usize) -> Result<Vec<BlockElement>> {
    (1..=r).map(|m| t_generator(m, 2 * r)).collect()
}

/// `C₀ ⊗ I + Σ_k C_k ⊗ T_k` as a `d×d` array of block elements.
pub fn section6_element(c0: &ComplexMatrix, cs: &[ComplexMatrix], horizon: usize) -> Result<SquareArray<BlockElement>> {
    let d = c0.ensure_square()?;
    let profile = BlockProfile::linear(horizon);
    let ts: Vec<BlockElement> = (1..=cs.len()).map(|m| t_generator(m, horizon)).collect::<Result<_>>()?;
    let id = BlockElement::identity(profile);
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut e = id.scale(c0[(i, j)]);
            for (ck, tk) in cs.iter().zip(&ts) {
                if ck.shape() != (d, d) {
                    return Err(Error::DimensionMismatch(
                        "coefficient matrices must share C0's shape".into(),
                    ));
                }
                e = e.add(&tk.scale(ck[(i, j)]))?;
            }
            out.push(e);
        }
    }
    SquareArray::new(d, out)
}

/// Recovers `(C₀, [C₁ … C_r])` from an array of the form `C₀ ⊗ I + Σ C_k ⊗ T_k`.
pub fn decompose_section6(a: &SquareArray<BlockElement>) -> Result<(ComplexMatrix, Vec<ComplexMatrix>)> {
    let profile = common_profile(a)?;
    if profile.rule != SizeRule::Linear {
        return Err(Error::FormMismatch(
            "the generators T_k live on the profile rₙ = n".into(),
        ));
    }
    let d = a.size();
    let slots = profile.horizon / 2;
    let mut c0 = ComplexMatrix::zeros(d, d);
    let mut cs = vec![ComplexMatrix::zeros(d, d); slots];
    for i in 0..d {
        for j in 0..d {
            let e = a.get(i, j);
            c0[(i, j)] = e.tail.scalar;
            for (r, c, v) in e.tail.entries() {
                if c != r + 1 || r % 2 != 0 {
                    return Err(Error::FormMismatch(format!(
                        "tail entry at ({r},{c}) is not a T_k position"
                    )));
                }
                cs[r / 2][(i, j)] = v * 2.0;
            }
        }
    }
    let used = cs.iter().rposition(|c| !c.is_zero(0.0)).map_or(0, |k| k + 1);
    cs.truncate(used);
    let rebuilt = section6_element(&c0, &cs, profile.horizon)?;
    for (k, (x, y)) in a.entries().iter().zip(rebuilt.entries()).enumerate() {
        for n in 1..=profile.horizon {
            let bx = x.gamma(n);
            let scale = 1.0 + bx.max_abs();
            if bx.dist(&y.gamma(n)) > 1e-12 * scale {
                return Err(Error::FormMismatch(format!(
                    "entry ({}, {}) differs from its tail-determined form at block {n}",
                    k / d,
                    k % d
                )));
            }
        }
    }
    Ok((c0, cs))
}

/// `[[C₀, c·C_k], [0, C₀]]`.
pub fn shuffle_block(c0: &ComplexMatrix, ck: &ComplexMatrix, c: f64) -> ComplexMatrix {
    let d = c0.rows();
    let mut m = ComplexMatrix::zeros(2 * d, 2 * d);
    m.set_block(0, 0, c0);
    m.set_block(d, d, c0);
    m.set_block(0, d, &ck.scale_real(c));
    m
}

/// Norms of the shuffled summands of `γₙ^{(d)}(A)`: `Γ′_k` for pairs `2k < n`, `Γ_k` for
/// `2k = n`, and `‖C₀‖` once more when coordinates remain outside the occupied pairs.
pub fn shuffle_norms(a: &SquareArray<BlockElement>, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidConfig("blocks are indexed from 1".into()));
    }
    let (c0, cs) = decompose_section6(a)?;
    let pairs = cs.len().min(n / 2);
    let mut out = Vec::with_capacity(pairs + 1);
    for (k, ck) in cs.iter().enumerate().take(pairs) {
        let c = if 2 * (k + 1) == n { 1.0 } else { 0.5 };
        out.push(operator_norm(&shuffle_block(&c0, ck, c)));
    }
    if n > 2 * pairs {
        out.push(operator_norm(&c0));
    }
    Ok(out)
}

/// Span of block elements closed under products.
#[derive(Debug, Clone)]
pub struct BlockAlgebra {
    profile: BlockProfile,
    generators: Vec<BlockElement>,
    basis: Vec<BlockElement>,
}

impl BlockAlgebra {
    /// Product saturation of the generators (and the identity sequence when `unital`).
    pub fn generate(
        profile: BlockProfile,
        generators: Vec<BlockElement>,
        unital: bool,
        cfg: &ToleranceConfig,
    ) -> Result<Self> {
        if let Some(bad) = generators.iter().find(|g| g.profile != profile) {
            return Err(Error::ProfileMismatch(format!(
                "{:?} versus {:?}",
                bad.profile, profile
            )));
        }
        let len = BlockElement::zero(profile).to_vector().len();
        let mut span = SpanBuilder::new(len, cfg.structural_tol, 1.0);
        let push = |span: &mut SpanBuilder, e: &BlockElement| {
            let v = e.to_vector();
            let n = vnorm(&v);
            if n > 0.0 {
                span.push(&v.iter().map(|z| z / n).collect::<Vec<_>>());
            }
        };
        if unital {
            push(&mut span, &BlockElement::identity(profile));
        }
        for g in &generators {
            push(&mut span, g);
        }
        let mut frontier = 0;
        while frontier < span.len() {
            let len = span.len();
            let basis: Vec<BlockElement> = span
                .basis()
                .iter()
                .map(|v| BlockElement::from_vector(profile, v))
                .collect();
            for i in 0..len {
                for j in 0..len {
                    if i < frontier && j < frontier {
                        continue;
                    }
                    push(&mut span, &basis[i].mul(&basis[j])?);
                }
            }
            frontier = len;
        }
        let basis = span
            .basis()
            .iter()
            .map(|v| BlockElement::from_vector(profile, v))
            .collect();
        Ok(Self {
            profile,
            generators,
            basis,
        })
    }

    pub fn profile(&self) -> BlockProfile {
        self.profile
    }

    pub fn generators(&self) -> &[BlockElement] {
        &self.generators
    }

    pub fn basis(&self) -> &[BlockElement] {
        &self.basis
    }

    /// Dimension of the coefficient space.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Basis of `𝒜 ∩ 𝔎`: elements of the algebra whose tail vanishes.
pub fn compact_part(alg: &BlockAlgebra, cfg: &ToleranceConfig) -> Vec<BlockElement> {
    let images: Vec<Vec<Complex64>> = alg.basis.iter().map(|b| b.tail_vector()).collect();
    kernel(&images, cfg.structural_tol)
        .into_iter()
        .map(|w| {
            let mut e = BlockElement::zero(alg.profile);
            for (c, b) in w.iter().zip(&alg.basis) {
                e = e.add(&b.scale(*c)).expect("common profile");
            }
            e.tail = TailTemplate::zero();
            e
        })
        .collect()
}

/// Outcome of the block-`n` surjectivity test for the compact part.
#[derive(Debug, Clone, PartialEq)]
pub struct Surjectivity {
    pub surjective: bool,
    pub image_dim: usize,
    pub target_dim: usize,
    /// Sampled `max_R (inf ‖preimage‖ − 1)` over unit targets; only computed when surjective.
    pub deficit: Option<f64>,
    pub targets: usize,
}

/// Whether `γₙ` maps `𝒜 ∩ 𝔎` onto `M_{rₙ}`, with a sampled complete-quotient deficit.
pub fn gamma_quotient_surjectivity(
    alg: &BlockAlgebra,
    n: usize,
    levels: usize,
    cfg: &ToleranceConfig,
) -> Result<Surjectivity> {
    let profile = alg.profile;
    if n == 0 || n > profile.horizon {
        return Err(Error::IndexOutOfExplicitRange {
            index: n,
            horizon: profile.horizon,
        });
    }
    let compact = compact_part(alg, cfg);
    let r = profile.size(n);
    let images: Vec<ComplexMatrix> = compact.iter().map(|k| k.gamma(n)).collect();
    let mut span = SpanBuilder::new(r * r, cfg.structural_tol, 1.0);
    for g in &images {
        let norm = g.frobenius_norm();
        if norm > 0.0 {
            span.push(g.scale_real(1.0 / norm).as_slice());
        }
    }
    let image_dim = span.len();
    let surjective = image_dim == r * r;
    if !surjective {
        return Ok(Surjectivity {
            surjective,
            image_dim,
            target_dim: r * r,
            deficit: None,
            targets: 0,
        });
    }
    let engine = PreimageEngine::new(&compact, n, cfg);
    let mut rng = rng_for(cfg.rng_seed, 0x5eed_0001);
    let mut deficit: f64 = 0.0;
    let mut targets = 0;
    for d in 1..=levels.max(1) {
        for t in 0..16 {
            let target = if t % 2 == 0 {
                let g = random_matrix(d * r, d * r, &mut rng);
                g.scale_real(1.0 / operator_norm(&g))
            } else {
                let u = random_unit_vector(d * r, &mut rng);
                let v = random_unit_vector(d * r, &mut rng);
                ComplexMatrix::from_fn(d * r, d * r, |i, j| u[i] * v[j].conj())
            };
            deficit = deficit.max(engine.min_preimage_norm(&target, d) - 1.0);
            targets += 1;
        }
    }
    Ok(Surjectivity {
        surjective,
        image_dim,
        target_dim: r * r,
        deficit: Some(deficit),
        targets,
    })
}

/// Least-squares preimages under `γₙ^{(d)}` restricted to the compact part, refined by
/// subgradient descent of the sup norm along the kernel of `γₙ`.
struct PreimageEngine {
    n: usize,
    r: usize,
    horizon: usize,
    /// `γ_m(K_b)` for each explicit block `m` and compact basis element `b`.
    blocks: Vec<Vec<ComplexMatrix>>,
    /// Pseudo-inverse data: Gram eigenpairs of `γₙ` on the compact basis.
    gram_inv: ComplexMatrix,
    /// Kernel directions of `γₙ` in compact coordinates.
    null: Vec<Vec<Complex64>>,
    iters: usize,
}

impl PreimageEngine {
    fn new(compact: &[BlockElement], n: usize, cfg: &ToleranceConfig) -> Self {
        let profile = compact[0].profile;
        let horizon = profile.horizon;
        let blocks: Vec<Vec<ComplexMatrix>> = (1..=horizon)
            .map(|m| compact.iter().map(|k| k.gamma(m)).collect())
            .collect();
        let images: Vec<Vec<Complex64>> = blocks[n - 1].iter().map(|g| g.as_slice().to_vec()).collect();
        let q = compact.len();
        let gram = ComplexMatrix::from_fn(q, q, |a, b| vdot(&images[a], &images[b]));
        let eig = crate::linalg::hermitian_eig(&gram.hermitian_part(), cfg).expect("Gram is Hermitian");
        let cut = cfg.structural_tol * eig.values[0].max(1.0);
        let mut gram_inv = ComplexMatrix::zeros(q, q);
        for (k, &l) in eig.values.iter().enumerate() {
            if l > cut {
                let u = eig.vector(k);
                gram_inv += &ComplexMatrix::from_fn(q, q, |a, b| u[a] * u[b].conj() / l);
            }
        }
        let null = kernel(&images, cfg.structural_tol);
        Self {
            n,
            r: profile.size(n),
            horizon,
            blocks,
            gram_inv,
            null,
            iters: cfg.opt_iters,
        }
    }

    /// Ampliated block `m` of the preimage with compact coordinates `coeffs[i][j]`.
    fn block(&self, m: usize, coeffs: &[Vec<Complex64>], d: usize) -> ComplexMatrix {
        let gs = &self.blocks[m - 1];
        let rm = gs[0].rows();
        let mut out = ComplexMatrix::zeros(d * rm, d * rm);
        for i in 0..d {
            for j in 0..d {
                let mut e = ComplexMatrix::zeros(rm, rm);
                for (c, g) in coeffs[i * d + j].iter().zip(gs) {
                    if *c != C_ZERO {
                        e += &g.scale(*c);
                    }
                }
                out.set_block(i * rm, j * rm, &e);
            }
        }
        out
    }

    fn sup(&self, coeffs: &[Vec<Complex64>], d: usize) -> (f64, usize) {
        (1..=self.horizon)
            .map(|m| (operator_norm(&self.block(m, coeffs, d)), m))
            .fold((0.0, 1), |acc, x| if x.0 > acc.0 { x } else { acc })
    }

    fn min_preimage_norm(&self, target: &ComplexMatrix, d: usize) -> f64 {
        let r = self.r;
        let q = self.gram_inv.rows();
        let gs = &self.blocks[self.n - 1];
        let mut coeffs: Vec<Vec<Complex64>> = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let rij = target.submatrix(i * r, j * r, r, r);
                let rhs: Vec<Complex64> = gs.iter().map(|g| g.frobenius_inner(&rij)).collect();
                coeffs.push(self.gram_inv.matvec(&rhs));
            }
        }
        let (mut best, mut m_star) = self.sup(&coeffs, d);
        if self.null.is_empty() {
            return best;
        }
        let mut current = coeffs.clone();
        let mut step = 0.25 * best;
        for _ in 0..self.iters {
            let block = self.block(m_star, &current, d);
            let rm = block.rows() / d;
            let (_, v) = top_singular(&block);
            let bv = block.matvec(&v);
            let s = vnorm(&bv);
            if s == 0.0 {
                break;
            }
            let u: Vec<Complex64> = bv.iter().map(|z| z / s).collect();
            // Directional derivative of ‖·‖ along a kernel direction W in entry (i, j) is Re(uᵢ* W vⱼ).
            let mut grad: Vec<Vec<Complex64>> = vec![vec![C_ZERO; q]; d * d];
            let mut gnorm = 0.0;
            for i in 0..d {
                for j in 0..d {
                    for w in &self.null {
                        let mut wm = ComplexMatrix::zeros(rm, rm);
                        for (c, g) in w.iter().zip(&self.blocks[m_star - 1]) {
                            wm += &g.scale(*c);
                        }
                        let ui = &u[i * rm..(i + 1) * rm];
                        let vj = &v[j * rm..(j + 1) * rm];
                        let val = vdot(ui, &wm.matvec(vj)).conj();
                        gnorm += val.norm_sqr();
                        for (gb, wb) in grad[i * d + j].iter_mut().zip(w) {
                            *gb += val * wb;
                        }
                    }
                }
            }
            let gnorm = gnorm.sqrt();
            if gnorm < 1e-14 {
                break;
            }
            for (cur, g) in current.iter_mut().zip(&grad) {
                for (c, gb) in cur.iter_mut().zip(g) {
                    *c -= *gb * (step / gnorm);
                }
            }
            let (val, m) = self.sup(&current, d);
            m_star = m;
            if val < best {
                best = val;
            } else {
                step *= 0.7;
            }
            if step < 1e-12 {
                break;
            }
        }
        best
    }
}
