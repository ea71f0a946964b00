//! Acceptance suite: one line per criterion, nonzero exit when any criterion fails.
//!
//! Every check recomputes its quantity from primitive matrix operations where that is
//! possible instead of trusting the residual fields reported by the library.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::Rng;

use opalg_cli::builtins::{
    all_words, hyponormal_sample, matrix_unit_block_algebra, structured_generators, COVARIANCE_GRAPHS, RFD_GRAPH,
    SUBGRAPH_CASES,
};
use opalg_cli::{verify_all, Flags};
use opalg_core::blockseq::{
    gamma_quotient_surjectivity, quotient_norm, section6_element, shuffle_norms, sup_norm, t_generator, t_generators,
};
use opalg_core::compress::{
    bimodule_compression, certifying_xi, invariant_compression, maximizing_vector, norm_attaining_compression,
};
use opalg_core::envelope::{
    corner_subspace, full_matrix_subspace, m2_envelope_check, roots_of_unity_subspace, shilov_ideal_search,
};
use opalg_core::fock::poly::random_tensor_poly;
use opalg_core::fock::{
    creation, eval_tensor_poly, left_action, rfd_compression_tensor, subgraph_restriction, AElement, Graph, Symbol,
    XElement,
};
use opalg_core::linalg::random::{random_complex, random_matrix, random_vector, rng_for};
use opalg_core::linalg::{ampliate, min_eigenvalue, operator_norm, psd_check, vnorm, vsub, C_ZERO};
use opalg_core::opalg::generate_algebra;
use opalg_core::{
    BlockAlgebra, BlockElement, BlockProfile, ComplexMatrix, Correspondence, FiniteCStarAlgebra, Source, SquareArray,
    TailTemplate, TensorPoly, ToleranceConfig, TruncatedFockSpace, UnitalSubspace, WordSpec,
};

const SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;

fn cfg() -> ToleranceConfig {
    ToleranceConfig::with_seed(SEED)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core<T>(r: opalg_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn block(rows: usize, blocks: &[(&ComplexMatrix, usize, usize)]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(rows, rows);
    for (b, r, c) in blocks {
        out.set_block(*r, *c, b);
    }
    out
}

fn commutator_t1() -> Result<BlockElement, String> {
    let t1 = core(t_generator(1, 2))?;
    let a = core(t1.adjoint().mul(&t1))?;
    let b = core(t1.mul(&t1.adjoint()))?;
    core(a.sub(&b))
}

fn c1_section6_exact() -> Outcome {
    let c = commutator_t1()?;
    let q = core(quotient_norm(&SquareArray::single(c.clone())))?;
    ensure((q - 0.25).abs() <= 1e-9, || format!("quotient norm {q}"))?;
    for n in 3..=12 {
        let mut expected = ComplexMatrix::zeros(n, n);
        expected[(0, 0)] = Complex64::new(-0.25, 0.0);
        expected[(1, 1)] = Complex64::new(0.25, 0.0);
        ensure(c.gamma(n) == expected, || {
            format!("block {n} differs from (E22 - E11)/4")
        })?;
    }
    Ok(format!("quotient norm {q}, blocks 3..=12 exact"))
}

fn c2_quotient_independence() -> Outcome {
    let mut worst = f64::INFINITY;
    for k in 0..25u64 {
        let r = 1 + (k % 4) as usize;
        let mut rng = rng_for(SEED, 0x200 + k);
        let ts = core(t_generators(r))?;
        let alpha: Vec<Complex64> = (0..r).map(|_| random_complex(&mut rng)).collect();
        let mut e = BlockElement::zero(ts[0].profile());
        for (a, t) in alpha.iter().zip(&ts) {
            e = core(e.add(&t.scale(*a)))?;
        }
        let q = core(quotient_norm(&SquareArray::single(e)))?;
        let bound = 0.5 * alpha.iter().map(|a| a.norm()).fold(0.0, f64::max);
        ensure(q >= bound - 1e-9, || format!("sample {k}: {q} < {bound}"))?;
        worst = worst.min(q - bound);
    }
    Ok(format!("25 samples, min(quotient - max|a|/2) = {worst:.3e}"))
}

fn c3_strict_gap() -> Outcome {
    let mut shuffle_err: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    for k in 0..25u64 {
        let d = 1 + (k % 3) as usize;
        let r = 1 + ((k / 3) % 3) as usize;
        let mut rng = rng_for(SEED, 0x300 + k);
        let c0 = random_matrix(d, d, &mut rng);
        let cs: Vec<ComplexMatrix> = (0..r).map(|_| random_matrix(d, d, &mut rng)).collect();
        for (j, ck) in cs.iter().enumerate() {
            let delta = core(min_eigenvalue(&(ck * &ck.adjoint()), &cfg()))?;
            ensure(
                delta > 0.0 && core(min_eigenvalue(&(&c0 * &c0.adjoint()), &cfg()))? > 0.0,
                || format!("sample {k}: tuple not invertible"),
            )?;
            let half = ck.scale_real(0.5);
            let gamma = block(2 * d, &[(&c0, 0, 0), (ck, 0, d), (&c0, d, d)]);
            let gamma_p = block(2 * d, &[(&c0, 0, 0), (&half, 0, d), (&c0, d, d)]);
            let (g, gp) = (operator_norm(&gamma), operator_norm(&gamma_p));
            ensure(gp < g, || format!("sample {k}, k={}: |G'| = {gp} >= |G| = {g}", j + 1))?;
            let lower = operator_norm(&c0).powi(2) + delta;
            ensure(g * g >= lower - 1e-8, || {
                format!("sample {k}: |G|^2 = {} < {lower}", g * g)
            })?;
            min_margin = min_margin.min(g - gp);
        }
        let a = core(section6_element(&c0, &cs, 2 * r))?;
        let (q, s) = (core(quotient_norm(&a))?, core(sup_norm(&a))?);
        ensure(q < s, || format!("sample {k}: quotient {q} not below sup {s}"))?;
        for n in 1..=2 * r + 4 {
            let direct = operator_norm(&core(ampliate(&a.map(|e| e.gamma(n))))?);
            let shuffled = core(shuffle_norms(&a, n))?.into_iter().fold(0.0, f64::max);
            shuffle_err = shuffle_err.max((direct - shuffled).abs());
        }
    }
    ensure(shuffle_err <= 1e-10, || format!("shuffle mismatch {shuffle_err:.3e}"))?;
    Ok(format!(
        "min(|G| - |G'|) = {min_margin:.3e}, shuffle error {shuffle_err:.1e}"
    ))
}

fn random_block_element(k: u64) -> Result<SquareArray<BlockElement>, String> {
    let mut rng = rng_for(SEED, 0x400 + k);
    let horizon = 1 + (k % 6) as usize;
    let profile = if k.is_multiple_of(2) {
        BlockProfile::linear(horizon)
    } else {
        core(BlockProfile::constant(1 + (k % 3) as usize, horizon))?
    };
    let d = if k.is_multiple_of(5) { 2 } else { 1 };
    let support = profile.max_tail_support();
    let mut entries = Vec::new();
    for _ in 0..(k % 3) {
        let i = rng.random_range(0..support);
        let j = rng.random_range(0..support);
        entries.push((i, j, random_complex(&mut rng)));
    }
    let alpha = if k % 4 == 3 { C_ZERO } else { random_complex(&mut rng) };
    let mut out = Vec::new();
    for _ in 0..d * d {
        let tail = TailTemplate::new(alpha * random_complex(&mut rng), &entries);
        let e = BlockElement::from_fn(profile, tail, |n| {
            let r = profile.size(n);
            random_matrix(r, r, &mut rng).scale_real(rng.random_range(0.0..3.0))
        });
        out.push(core(e)?);
    }
    core(SquareArray::new(d, out))
}

fn c4_limsup_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..50u64 {
        let a = random_block_element(k)?;
        let horizon = a.get(0, 0).profile().horizon();
        let norm_at = |n: usize| -> Result<f64, String> { Ok(operator_norm(&core(ampliate(&a.map(|e| e.gamma(n))))?)) };
        let mut tail_max: f64 = 0.0;
        let mut all_max: f64 = 0.0;
        for n in 1..=horizon + 20 {
            let v = norm_at(n)?;
            all_max = all_max.max(v);
            if n > horizon {
                tail_max = tail_max.max(v);
            }
        }
        let q = core(quotient_norm(&a))?;
        let s = core(sup_norm(&a))?;
        ensure((q - tail_max).abs() <= 1e-12, || {
            format!("element {k}: quotient {q} vs {tail_max}")
        })?;
        ensure((s - all_max).abs() <= 1e-12, || {
            format!("element {k}: sup {s} vs {all_max}")
        })?;
        worst = worst.max((q - tail_max).abs()).max((s - all_max).abs());
    }
    Ok(format!("50 elements, max deviation {worst:.1e}"))
}

/// `‖Q*ab Q − Q*aQ Q*bQ‖` over random pairs from the algebra.
fn multiplicativity<R: Rng>(alg: &opalg_core::opalg::FiniteOperatorAlgebra, q: &ComplexMatrix, rng: &mut R) -> f64 {
    (0..5)
        .map(|_| {
            let a = alg.random_element(rng);
            let b = alg.random_element(rng);
            let scale = operator_norm(&a) * operator_norm(&b);
            (&(&a * &b).compress(q) - &(&a.compress(q) * &b.compress(q))).frobenius_norm() / scale.max(1.0)
        })
        .fold(0.0, f64::max)
}

fn c5_norm_attainment() -> Outcome {
    let c = cfg();
    let mut gap: f64 = 0.0;
    let mut mult: f64 = 0.0;
    let mut dims = Vec::new();
    for j in 0..20 {
        let gens = structured_generators(SEED, j, 6);
        ensure(gens.len() <= 3, || "too many generators".into())?;
        let alg = core(generate_algebra(&gens, true, &c))?;
        dims.push(alg.dim());
        let mut rng = rng_for(SEED, 0x500 + j as u64);
        for d in 1..=2 {
            let a = SquareArray::from_fn(d, |_, _| alg.random_element(&mut rng));
            let rep = core(norm_attaining_compression(&alg, &a, &c))?;
            let q = &rep.subspace_basis;
            let full = operator_norm(&core(ampliate(&a))?);
            let compressed = operator_norm(&core(ampliate(&a.map(|x| x.compress(q))))?);
            gap = gap.max((full - compressed).abs());
            mult = mult.max(multiplicativity(&alg, q, &mut rng));
        }
    }
    ensure(gap <= 1e-8, || format!("norm gap {gap:.3e}"))?;
    ensure(mult <= 1e-9, || format!("multiplicativity residual {mult:.3e}"))?;
    let proper = dims.iter().filter(|&&d| d < 36).count();
    Ok(format!(
        "norm gap {gap:.1e}, multiplicativity {mult:.1e}, {proper}/20 proper subalgebras"
    ))
}

fn word_factor(source: Source, m: &ComplexMatrix) -> ComplexMatrix {
    match source {
        Source::Plain => m.clone(),
        Source::Adjoint => m.adjoint(),
    }
}

/// `‖w ξ − Q w_F Q*ξ‖` with `w_F` the product of compressed factors.
fn word_identity_residual(w: &WordSpec, q: &ComplexMatrix, xi: &[Complex64]) -> f64 {
    let mut direct = xi.to_vec();
    let mut compressed = q.adjoint().matvec(xi);
    for (s, f) in w.factors.iter().rev() {
        direct = word_factor(*s, f).matvec(&direct);
        compressed = word_factor(*s, &f.compress(q)).matvec(&compressed);
    }
    let via = q.matvec(&compressed);
    vnorm(&vsub(&direct, &via)) * w.coefficient.norm()
}

fn c6_invariant_compression() -> Outcome {
    let c = cfg();
    let mut worst: f64 = 0.0;
    let mut words_checked = 0;
    let mut adjoint_words = 0;
    for j in 0..25 {
        let m = 4 + j % 3;
        let gens = structured_generators(SEED, 200 + j, m);
        let alg = core(generate_algebra(&gens, true, &c))?;
        let mut rng = rng_for(SEED, 0x600 + j as u64);
        let letters = &gens[..gens.len().min(2)];
        let words = all_words(letters, 4, &mut rng);
        let xi = vec![random_vector(m, &mut rng)];
        let rep = core(invariant_compression(&alg, &words, &xi, &c))?;
        for w in &words {
            worst = worst.max(word_identity_residual(w, &rep.subspace_basis, &xi[0]));
            words_checked += 1;
            if w.factors.iter().any(|(s, _)| *s == Source::Adjoint) {
                adjoint_words += 1;
            }
        }
    }
    ensure(worst <= 1e-10, || format!("identity residual {worst:.3e}"))?;
    Ok(format!(
        "{words_checked} words ({adjoint_words} with adjoints), residual {worst:.1e}"
    ))
}

fn c7_bimodule() -> Outcome {
    let c = cfg();
    let mut worst: f64 = 0.0;
    let mut cert_gap = f64::NEG_INFINITY;
    let mut triples = 0;
    for j in 0..10 {
        let m = 4 + j % 3;
        let gens = structured_generators(SEED, 300 + j, m);
        let alg = core(generate_algebra(&gens, true, &c))?;
        let mut rng = rng_for(SEED, 0x700 + j as u64);
        let xi: Vec<_> = (0..1 + j % 2).map(|_| random_vector(m, &mut rng)).collect();
        let rho = core(bimodule_compression(&alg, &xi, 0, &c))?;
        let q = &rho.basis;
        for _ in 0..10 {
            let a = alg.random_element(&mut rng);
            let b = alg.random_element(&mut rng);
            let t = random_matrix(m, m, &mut rng);
            let lhs = (&(&a.adjoint() * &t) * &b).compress(q);
            let rhs = &(&a.compress(q).adjoint() * &t.compress(q)) * &b.compress(q);
            let scale = operator_norm(&a) * operator_norm(&t) * operator_norm(&b);
            worst = worst.max(operator_norm(&(&lhs - &rhs)) / scale.max(1.0));
            triples += 1;
        }
        let t = SquareArray::from_fn(2, |_, _| alg.random_element(&mut rng));
        let big = core(ampliate(&t))?;
        let zeta = core(maximizing_vector(&big))?;
        let rho = core(bimodule_compression(&alg, &core(certifying_xi(&t, &zeta))?, 0, &c))?;
        let compressed = operator_norm(&core(ampliate(&t.map(|x| x.compress(&rho.basis))))?);
        cert_gap = cert_gap.max(operator_norm(&big) - compressed);
    }
    ensure(worst <= 1e-10, || format!("bimodule residual {worst:.3e}"))?;
    ensure(cert_gap <= 1e-8, || format!("certified norm short by {cert_gap:.3e}"))?;
    Ok(format!(
        "{triples} triples, residual {worst:.1e}, certified gap {cert_gap:.1e}"
    ))
}

fn c8_hyponormal() -> Outcome {
    let c = cfg();
    let mut passing = 0;
    let mut worst: f64 = 0.0;
    for k in 0..10_000 {
        let a = hyponormal_sample(SEED, k);
        let comm = &(&a.adjoint() * &a) - &(&a * &a.adjoint());
        if core(psd_check(&comm.hermitian_part(), &c))? {
            passing += 1;
            worst = worst.max(operator_norm(&comm));
        }
    }
    ensure(passing > 0, || "no sample passed the hyponormality test".into())?;
    ensure(worst <= 1e-9, || {
        format!("hyponormal sample with |a*a - aa*| = {worst:.3e}")
    })?;
    Ok(format!("{passing}/10000 hyponormal, max commutator {worst:.1e}"))
}

/// Module operations written out per backend.
fn oracle_left(corr: &Correspondence, a: &AElement, x: &XElement) -> XElement {
    match corr {
        Correspondence::Graph(g) => {
            let av = a.scalars();
            XElement::new(g.edges().iter().zip(&x.coords).map(|(e, c)| av[e.range] * c).collect())
        }
        Correspondence::Free(_) => x.scale(a.scalars()[0]),
        Correspondence::SelfOverA(_) => pack(&a.mul(&unpack(corr, x))),
    }
}

fn oracle_right(corr: &Correspondence, x: &XElement, a: &AElement) -> XElement {
    match corr {
        Correspondence::Graph(g) => {
            let av = a.scalars();
            XElement::new(g.edges().iter().zip(&x.coords).map(|(e, c)| c * av[e.source]).collect())
        }
        Correspondence::Free(_) => x.scale(a.scalars()[0]),
        Correspondence::SelfOverA(_) => pack(&unpack(corr, x).mul(a)),
    }
}

fn oracle_inner(corr: &Correspondence, x: &XElement, y: &XElement) -> AElement {
    match corr {
        Correspondence::Graph(g) => {
            let mut v = vec![C_ZERO; g.vertex_count()];
            for (k, e) in g.edges().iter().enumerate() {
                v[e.source] += x.coords[k].conj() * y.coords[k];
            }
            AElement::from_scalars(&v)
        }
        Correspondence::Free(_) => {
            AElement::from_scalars(&[x.coords.iter().zip(&y.coords).map(|(a, b)| a.conj() * b).sum()])
        }
        Correspondence::SelfOverA(_) => unpack(corr, x).adjoint().mul(&unpack(corr, y)),
    }
}

fn unpack(corr: &Correspondence, x: &XElement) -> AElement {
    let mut pos = 0;
    let blocks = corr
        .coefficients()
        .block_dims()
        .iter()
        .map(|&k| {
            let b = ComplexMatrix::new(k, k, x.coords[pos..pos + k * k].to_vec()).expect("block");
            pos += k * k;
            b
        })
        .collect();
    AElement { blocks }
}

fn pack(a: &AElement) -> XElement {
    XElement::new(a.blocks.iter().flat_map(|b| b.as_slice().to_vec()).collect())
}

/// Largest covariance defect on columns of levels `≤ N−1`, over `samples` seeded triples.
fn covariance_defect(f: &TruncatedFockSpace, samples: usize, stream: u64) -> Result<f64, String> {
    let corr = f.correspondence();
    let alg = corr.coefficients();
    let cols = f.dim_through(f.cutoff() - 1);
    let rows = f.dim();
    let restrict = |m: &ComplexMatrix| m.submatrix(0, 0, rows, cols);
    let mut rng = rng_for(SEED, stream);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let a = alg.random_element(&mut rng);
        let x = corr.random_x(&mut rng);
        let y = corr.random_x(&mut rng);
        let ra = core(left_action(f, &a))?;
        let tx = core(creation(f, &x))?;
        let ty = core(creation(f, &y))?;
        let left = &(&ra * &tx) - &core(creation(f, &oracle_left(corr, &a, &x)))?;
        let right = &(&tx * &ra) - &core(creation(f, &oracle_right(corr, &x, &a)))?;
        let inner = &(&tx.adjoint() * &ty) - &core(left_action(f, &oracle_inner(corr, &x, &y)))?;
        for m in [left, right, inner] {
            worst = worst.max(operator_norm(&restrict(&m)));
        }
    }
    Ok(worst)
}

fn c9_fock_covariance() -> Outcome {
    let mut spaces = Vec::new();
    for text in COVARIANCE_GRAPHS {
        spaces.push(core(TruncatedFockSpace::new(
            Correspondence::Graph(core(Graph::parse(text))?),
            4,
        ))?);
    }
    spaces.push(core(TruncatedFockSpace::new(Correspondence::Free(2), 4))?);
    let m2 = core(FiniteCStarAlgebra::uniform(vec![2]))?;
    spaces.push(core(TruncatedFockSpace::new(Correspondence::SelfOverA(m2), 3))?);
    let mut worst: f64 = 0.0;
    for (k, f) in spaces.iter().enumerate() {
        let d = covariance_defect(f, 20, 0x900 + k as u64)?;
        ensure(d <= 1e-10, || format!("space {k}: covariance defect {d:.3e}"))?;
        worst = worst.max(d);
    }
    // I − L₁L₁* − L₂L₂* is exactly the vacuum projection on the truncation.
    let f = &spaces[3];
    let l1 = core(creation(f, &XElement::delta(2, 0)))?;
    let l2 = core(creation(f, &XElement::delta(2, 1)))?;
    let defect = &(&ComplexMatrix::identity(f.dim()) - &(&l1 * &l1.adjoint())) - &(&l2 * &l2.adjoint());
    ensure(defect == ComplexMatrix::unit(f.dim(), 0, 0), || {
        "row defect is not the vacuum projection".into()
    })?;
    ensure(core(psd_check(&defect, &cfg()))?, || "row defect not PSD".into())?;
    Ok(format!(
        "5 spaces, max defect {worst:.1e}, row defect = vacuum projection"
    ))
}

fn eval_words(poly: &TensorPoly, rho: &[ComplexMatrix], t: &[ComplexMatrix], n: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(n, n);
    for (c, word) in &poly.terms {
        let mut m = ComplexMatrix::identity(n);
        for s in word {
            m = match *s {
                Symbol::Rho(i) => &m * &rho[i],
                Symbol::T(j) => &m * &t[j],
            };
        }
        out += &m.scale(*c);
    }
    out
}

fn c10_tensor_compression() -> Outcome {
    let c = cfg();
    let corr = Correspondence::Graph(core(Graph::parse(RFD_GRAPH))?);
    let g = corr.graph().expect("graph backend");
    ensure(g.vertex_count() == 2 && g.edge_count() == 3, || {
        "wrong test graph".into()
    })?;
    let f = core(TruncatedFockSpace::new(corr.clone(), 4))?;
    let alg = corr.coefficients();
    let mut gap: f64 = 0.0;
    let mut cov: f64 = 0.0;
    for j in 0..10u64 {
        let mut rng = rng_for(SEED, 0xa00 + j);
        let poly = random_tensor_poly(&corr, 2, 3, &mut rng);
        let tc = core(rfd_compression_tensor(&f, &SquareArray::single(poly.clone()), &c))?;
        let q = &tc.report.subspace_basis;
        let k = q.cols();
        let rho: Vec<ComplexMatrix> = poly
            .a_table
            .iter()
            .map(|a| core(left_action(&f, a)).map(|m| m.compress(q)))
            .collect::<Result<_, _>>()?;
        let t: Vec<ComplexMatrix> = poly
            .x_table
            .iter()
            .map(|x| core(creation(&f, x)).map(|m| m.compress(q)))
            .collect::<Result<_, _>>()?;
        let truncated = operator_norm(&core(eval_tensor_poly(&f, &poly))?);
        let compressed = operator_norm(&eval_words(&poly, &rho, &t, k));
        gap = gap.max((truncated - compressed).abs());

        let xs: Vec<XElement> = (0..3).map(|_| corr.random_x(&mut rng)).collect();
        let txs: Vec<ComplexMatrix> = xs
            .iter()
            .map(|x| core(creation(&f, x)).map(|m| m.compress(q)))
            .collect::<Result<_, _>>()?;
        for _ in 0..5 {
            let a = alg.random_element(&mut rng);
            let ra = core(left_action(&f, &a))?.compress(q);
            for (x, tx) in xs.iter().zip(&txs) {
                let left = &(&ra * tx) - &core(creation(&f, &oracle_left(&corr, &a, x)))?.compress(q);
                let right = &(tx * &ra) - &core(creation(&f, &oracle_right(&corr, x, &a)))?.compress(q);
                cov = cov.max(operator_norm(&left)).max(operator_norm(&right));
            }
        }
        let blocks = SquareArray::from_fn(xs.len(), |i, l| -> ComplexMatrix {
            let inner = core(left_action(&f, &oracle_inner(&corr, &xs[i], &xs[l])))
                .expect("inner")
                .compress(q);
            &inner - &(&txs[i].adjoint() * &txs[l])
        });
        let e = core(min_eigenvalue(&core(ampliate(&blocks))?.hermitian_part(), &c))?;
        cov = cov.max(-e);
    }
    ensure(gap <= 1e-8, || format!("norm gap {gap:.3e}"))?;
    ensure(cov <= 1e-9, || format!("compressed covariance defect {cov:.3e}"))?;
    Ok(format!("10 polynomials, norm gap {gap:.1e}, covariance {cov:.1e}"))
}

fn lift(poly: &TensorPoly, vmap: &[Option<usize>], emap: &[Option<usize>]) -> TensorPoly {
    let a_table = poly
        .a_table
        .iter()
        .map(|a| {
            let s = a.scalars();
            AElement::from_scalars(&vmap.iter().map(|v| v.map_or(C_ZERO, |i| s[i])).collect::<Vec<_>>())
        })
        .collect();
    let x_table = poly
        .x_table
        .iter()
        .map(|x| XElement::new(emap.iter().map(|e| e.map_or(C_ZERO, |i| x.coords[i])).collect()))
        .collect();
    TensorPoly {
        a_table,
        x_table,
        terms: poly.terms.clone(),
    }
}

fn c11_graph_restriction() -> Outcome {
    let c = cfg();
    let mut worst: f64 = 0.0;
    for (name, text, labels) in SUBGRAPH_CASES {
        let g = core(Graph::parse(text))?;
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let res = core(subgraph_restriction(&g, &labels, 4, 10, &c))?;
        let fg = core(TruncatedFockSpace::new(Correspondence::Graph(g.clone()), 4))?;
        let corr_h = Correspondence::Graph(res.subgraph.clone());
        let fh = core(TruncatedFockSpace::new(corr_h.clone(), 4))?;
        for (e, img) in res.edge_images.iter().enumerate() {
            if img.is_none() {
                let image = res.apply(&core(creation(&fg, &XElement::delta(g.edge_count(), e)))?);
                ensure(image.as_slice().iter().all(|z| *z == C_ZERO), || {
                    format!("{name}: edge {e} not killed")
                })?;
            }
        }
        ensure(res.edge_images.iter().any(Option::is_none), || {
            format!("{name}: no leaving edge")
        })?;
        let mut rng = rng_for(SEED, 0xb00);
        for _ in 0..15 {
            let p = random_tensor_poly(&corr_h, 2, 4, &mut rng);
            let s_h = core(eval_tensor_poly(&fh, &p))?;
            let s_g = core(eval_tensor_poly(&fg, &lift(&p, &res.vertex_images, &res.edge_images)))?;
            let restricted = res.apply(&s_g);
            ensure(restricted.dist(&s_h) <= 1e-10, || {
                format!("{name}: restriction differs from subgraph value")
            })?;
            let deficit = operator_norm(&s_g) - operator_norm(&s_h);
            worst = worst.max(deficit.abs());
            ensure(deficit.abs() <= 1e-9, || format!("{name}: deficit {deficit:.3e}"))?;
        }
    }
    Ok(format!(
        "2 graphs, max |deficit| {worst:.1e}, leaving edges exactly zero"
    ))
}

fn c12_envelope() -> Outcome {
    let c = cfg();
    for n in [4, 6] {
        let r = core(shilov_ideal_search(&core(roots_of_unity_subspace(n, &c))?, &c))?;
        ensure(r.deletable.is_empty(), || {
            format!("roots {n}: deletable {:?}", r.deletable)
        })?;
        let min = r
            .deletions
            .iter()
            .filter(|(d, _)| !d.is_empty())
            .map(|(_, e)| e.deficit)
            .fold(f64::INFINITY, f64::min);
        ensure(min > 0.05, || format!("roots {n}: deletion deficit {min}"))?;
    }
    for m in 1..=3 {
        let r = core(shilov_ideal_search(&core(full_matrix_subspace(m, &c))?, &c))?;
        ensure(r.deletable.is_empty(), || format!("M_{m}: deletable {:?}", r.deletable))?;
    }
    let cases: Vec<(&str, UnitalSubspace)> = vec![
        ("M2", core(full_matrix_subspace(2, &c))?),
        ("roots4", core(roots_of_unity_subspace(4, &c))?),
        ("corner", core(corner_subspace(&c))?),
        ("scalars", core(UnitalSubspace::new(1, &[], &c))?),
        (
            "upper",
            core(UnitalSubspace::new(2, &[ComplexMatrix::unit(2, 0, 1)], &c))?,
        ),
    ];
    let mut exhaustive = 0;
    for (name, s) in &cases {
        let rep = core(m2_envelope_check(s, &c))?;
        ensure(rep.passed(), || {
            format!(
                "{name}: doubling failed {:?} vs {:?}",
                rep.s.envelope_dims, rep.a_s.envelope_dims
            )
        })?;
        let doubled: Vec<usize> = rep.s.envelope_dims.iter().map(|d| 2 * d).collect();
        let mut got = rep.a_s.envelope_dims.clone();
        let mut want = doubled.clone();
        got.sort_unstable();
        want.sort_unstable();
        ensure(got == want, || format!("{name}: envelope dims {got:?} vs {want:?}"))?;
        if rep.s.block_dims.len() <= 4 {
            let r = &rep.s;
            ensure(r.exhaustive, || format!("{name}: search not exhaustive"))?;
            let c_count = r.block_dims.len();
            ensure(r.deletions.len() + 1 >= (1 << c_count) - 1, || {
                format!("{name}: not every deletion evaluated")
            })?;
            for (deleted, est) in &r.deletions {
                if est.is_zero(&c) {
                    ensure(deleted.iter().all(|i| r.deletable.contains(i)), || {
                        format!("{name}: zero-deficit deletion {deleted:?} outside {:?}", r.deletable)
                    })?;
                }
            }
            exhaustive += 1;
        }
    }
    Ok(format!(
        "roots and M_m keep everything, 5 doublings, {exhaustive} exhaustive maximality checks"
    ))
}

fn c13_surjectivity() -> Outcome {
    let c = cfg();
    let s6 = core(BlockAlgebra::generate(
        BlockProfile::linear(4),
        core(t_generators(2))?,
        true,
        &c,
    ))?;
    let r = core(gamma_quotient_surjectivity(&s6, 2, 2, &c))?;
    ensure(!r.surjective && r.image_dim == 0, || {
        format!("worked-example algebra: {r:?}")
    })?;
    let alg = core(matrix_unit_block_algebra(&c))?;
    let r = core(gamma_quotient_surjectivity(&alg, 2, 2, &c))?;
    let deficit = r.deficit.unwrap_or(f64::INFINITY);
    ensure(r.surjective && deficit <= c.norm_tol, || {
        format!("matrix-unit algebra: {r:?}")
    })?;
    Ok(format!(
        "compact part {{0}} for the worked example, deficit {deficit:.1e} for matrix units"
    ))
}

fn c14_determinism() -> Outcome {
    let flags = Flags {
        seed: Some(SEED),
        ..Flags::default()
    };
    let first = verify_all(None, &flags, 1).map_err(|e| e.to_string())?;
    let second = verify_all(None, &flags, 4).map_err(|e| e.to_string())?;
    ensure(first.len() == second.len(), || "report counts differ".into())?;
    let mut bytes = 0;
    for (a, b) in first.iter().zip(&second) {
        let (ja, jb) = (a.to_json(), b.to_json());
        ensure(ja == jb, || format!("report {} differs between runs", a.scenario))?;
        bytes += ja.len();
    }
    Ok(format!("{} reports, {bytes} bytes identical", first.len()))
}

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion {
            id: 1,
            name: "worked example quotient norm and blocks",
            limit: secs(1),
            run: c1_section6_exact,
        },
        Criterion {
            id: 2,
            name: "quotient norm independence",
            limit: secs(5),
            run: c2_quotient_independence,
        },
        Criterion {
            id: 3,
            name: "strict gap and shuffle norms",
            limit: secs(30),
            run: c3_strict_gap,
        },
        Criterion {
            id: 4,
            name: "limsup oracle",
            limit: secs(10),
            run: c4_limsup_oracle,
        },
        Criterion {
            id: 5,
            name: "norm attainment in M_6",
            limit: secs(30),
            run: c5_norm_attainment,
        },
        Criterion {
            id: 6,
            name: "invariant compression of words",
            limit: secs(20),
            run: c6_invariant_compression,
        },
        Criterion {
            id: 7,
            name: "bimodule compression",
            limit: secs(20),
            run: c7_bimodule,
        },
        Criterion {
            id: 8,
            name: "hyponormal implies normal",
            limit: secs(10),
            run: c8_hyponormal,
        },
        Criterion {
            id: 9,
            name: "Fock covariance",
            limit: secs(30),
            run: c9_fock_covariance,
        },
        Criterion {
            id: 10,
            name: "tensor polynomial compression",
            limit: secs(60),
            run: c10_tensor_compression,
        },
        Criterion {
            id: 11,
            name: "graph restriction",
            limit: secs(20),
            run: c11_graph_restriction,
        },
        Criterion {
            id: 12,
            name: "envelope suite",
            limit: secs(120),
            run: c12_envelope,
        },
        Criterion {
            id: 13,
            name: "compact part surjectivity",
            limit: secs(10),
            run: c13_surjectivity,
        },
        Criterion {
            id: 14,
            name: "determinism of verify-all",
            limit: None,
            run: c14_determinism,
        },
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let over = c.limit.is_some_and(|l| elapsed > l);
        let limit = c.limit.map_or("none".to_string(), |l| format!("{}s", l.as_secs()));
        let (status, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("over time limit; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {:>2} {status} [{:.2}s / {limit}] {}: {detail}",
            c.id,
            elapsed.as_secs_f64(),
            c.name
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
