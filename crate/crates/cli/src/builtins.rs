//! Registry of builtin verification suites.

use num_complex::Complex64;
use serde_json::{json, Value};

use opalg_core::blockseq::{
    gamma_quotient_surjectivity, quotient_norm, strict_kappa_gap, sup_norm, t_generator, t_generators,
};
use opalg_core::compress::{
    bimodule_compression, certifying_xi, invariant_compression, maximizing_vector, norm_attaining_compression,
};
use opalg_core::envelope::{
    corner_subspace, full_matrix_subspace, ideal_lattice_m2_check, m2_envelope_check, roots_of_unity_subspace,
    shilov_search_in, EnvelopeContext,
};
use opalg_core::fock::poly::random_tensor_poly;
use opalg_core::fock::{
    covariance_residuals, creation, rfd_compression_tensor, row_defect, subgraph_restriction, toeplitz_norm_estimate,
    AElement, Graph, Symbol, XElement,
};
use opalg_core::linalg::random::{random_complex, random_matrix, random_unitary, random_vector, rng_for, uniform};
use opalg_core::linalg::{ampliate, min_eigenvalue, operator_norm, psd_check, C_ONE};
use opalg_core::opalg::{generate_algebra, hyponormal_defect};
use opalg_core::{
    BlockAlgebra, BlockElement, BlockProfile, ComplexMatrix, Correspondence, FiniteCStarAlgebra, ShilovResult, Source,
    SquareArray, TailTemplate, TensorPoly, ToleranceConfig, TruncatedFockSpace, UnitalSubspace, WordSpec,
};

use crate::error::{CliError, CliResult, Context};
use crate::payload::{self, matrix_value};
use crate::report::{Relation, ReportBuilder};
use crate::scenario::Settings;

type Runner = fn(&Settings, &Value) -> CliResult<ReportBuilder>;

pub struct Builtin {
    pub name: &'static str,
    pub summary: &'static str,
    /// Instances run by `verify-all`; parameterized entries list their concrete names.
    pub instances: &'static [&'static str],
    run: Runner,
}

pub const REGISTRY: &[Builtin] = &[
    Builtin {
        name: "section6",
        summary: "generators T_m of the linear block-sequence algebra: commutator quotient norm and blocks",
        instances: &["section6"],
        run: section6,
    },
    Builtin {
        name: "popescu-d2",
        summary: "free semigroup Fock space with two generators: row contraction certificate",
        instances: &["popescu-d2"],
        run: popescu_d2,
    },
    Builtin {
        name: "graph-loop",
        summary: "single loop graph: shift norms and the truncated norm sequence of 1 + t",
        instances: &["graph-loop"],
        run: graph_loop,
    },
    Builtin {
        name: "fdoa-roots-N",
        summary: "span{1, z} over the N-th roots of unity: no deletable summand (parameter N)",
        instances: &["fdoa-roots-4", "fdoa-roots-6"],
        run: fdoa_roots,
    },
    Builtin {
        name: "m2-envelope",
        summary: "envelope doubling for A_S in M_2(C*(S)) and the matching of ideal lattices",
        instances: &["m2-envelope"],
        run: m2_envelope,
    },
    Builtin {
        name: "fdim-norm-attain",
        summary: "norm-attaining and invariant compressions of seeded unital subalgebras of M_6",
        instances: &["fdim-norm-attain"],
        run: fdim_norm_attain,
    },
    Builtin {
        name: "bimodule",
        summary: "compressions that are A-bimodule maps, with certifying vectors",
        instances: &["bimodule"],
        run: bimodule,
    },
    Builtin {
        name: "hyponormal",
        summary: "hyponormal matrices in M_4 have vanishing self-commutator",
        instances: &["hyponormal"],
        run: hyponormal,
    },
    Builtin {
        name: "subgraph",
        summary: "restriction of graph tensor algebras to induced subgraphs",
        instances: &["subgraph"],
        run: subgraph,
    },
    Builtin {
        name: "epssurj",
        summary: "surjectivity of gamma_n on the compact part of block-sequence algebras",
        instances: &["epssurj"],
        run: epssurj,
    },
    Builtin {
        name: "fock-covariance",
        summary: "module relations of the truncated Fock representation for all correspondence backends",
        instances: &["fock-covariance"],
        run: fock_covariance,
    },
    Builtin {
        name: "tensor-rfd",
        summary: "norm-attaining covariant compressions of tensor polynomials over a graph",
        instances: &["tensor-rfd"],
        run: tensor_rfd,
    },
];

pub fn list_builtins() -> &'static [Builtin] {
    REGISTRY
}

/// Concrete instance names in registry order.
pub fn verify_all_instances() -> Vec<&'static str> {
    REGISTRY.iter().flat_map(|b| b.instances.iter().copied()).collect()
}

/// Runs a builtin by concrete name; `fdoa-roots-<N>` carries its parameter in the name.
pub fn run_builtin(name: &str, settings: &Settings, params: &Value) -> CliResult<ReportBuilder> {
    if let Some(b) = REGISTRY.iter().find(|b| b.name == name) {
        if name == "fdoa-roots-N" && payload::opt_field(params, "n").is_none() {
            return Err(CliError::Validation("fdoa-roots-N requires the parameter 'n'".into()));
        }
        return (b.run)(settings, params);
    }
    if let Some(rest) = name.strip_prefix("fdoa-roots-") {
        let n: usize = rest
            .parse()
            .map_err(|_| CliError::Validation(format!("bad root count in builtin name '{name}'")))?;
        let mut params = params.clone();
        if !params.is_object() {
            params = json!({});
        }
        params["n"] = json!(n);
        return fdoa_roots(settings, &params);
    }
    Err(CliError::Validation(format!(
        "unknown builtin '{name}'; available: {}",
        REGISTRY.iter().map(|b| b.name).collect::<Vec<_>>().join(", ")
    )))
}

fn count(params: &Value, key: &str, default: usize) -> CliResult<usize> {
    payload::usize_or(params, key, default, "params")
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn section6(settings: &Settings, _params: &Value) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let mut r = ReportBuilder::new();
    let t1 = t_generator(1, 2).ctx("section6")?;
    let comm = t1
        .adjoint()
        .mul(&t1)
        .and_then(|a| a.sub(&t1.mul(&t1.adjoint())?))
        .ctx("section6")?;
    let comm_arr = SquareArray::single(comm.clone());
    let q = quotient_norm(&comm_arr).ctx("section6")?;
    r.metric("quotient_commutator_norm", q);
    r.check("quotient_commutator_error", (q - 0.25).abs(), Relation::Le, 1e-9);

    let mut worst: f64 = 0.0;
    for n in 3..=12 {
        let expected = &ComplexMatrix::unit(n, 1, 1).scale_real(0.25) - &ComplexMatrix::unit(n, 0, 0).scale_real(0.25);
        let g = comm.gamma(n);
        worst = worst.max(
            g.as_slice()
                .iter()
                .zip(expected.as_slice())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
        );
    }
    r.metric("gamma_commutator_max_entry_error", worst);
    r.check("gamma_commutator_exact", worst, Relation::Le, 0.0);

    let t1_arr = SquareArray::single(t1.clone());
    let qt = quotient_norm(&t1_arr).ctx("section6")?;
    let st = sup_norm(&t1_arr).ctx("section6")?;
    r.metric("quotient_norm_t1", qt).metric("sup_norm_t1", st);
    r.check("quotient_norm_t1_error", (qt - 0.5).abs(), Relation::Le, cfg.norm_tol);
    let (gap, strict) = strict_kappa_gap(&t1_arr, cfg).ctx("section6")?;
    r.metric("kappa_gap_t1", gap);
    r.require("kappa_gap_t1_strict", strict);

    let sup_c = sup_norm(&comm_arr).ctx("section6")?;
    r.metric("sup_commutator_norm", sup_c);
    r.artifact("gamma_3_commutator", matrix_value(&comm.gamma(3)));
    Ok(r)
}

fn popescu_d2(settings: &Settings, _params: &Value) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let cutoff = settings.cutoff.unwrap_or(4);
    let mut r = ReportBuilder::new();
    let f = TruncatedFockSpace::new(Correspondence::Free(2), cutoff).ctx("fock")?;
    let defect = row_defect(&f).ctx("fock")?;
    let min_eig = min_eigenvalue(&defect, cfg).ctx("linalg")?;
    let psd = psd_check(&defect, cfg).ctx("linalg")?;
    r.metric("cutoff", cutoff)
        .metric("fock_dim", f.dim())
        .metric("row_defect_min_eigenvalue", min_eig);
    r.require("row_defect_psd", psd);
    let sum = creation(&f, &XElement::new(vec![C_ONE, C_ONE])).ctx("fock")?;
    let n = operator_norm(&sum);
    r.metric("norm_l1_plus_l2", n);
    r.check(
        "norm_l1_plus_l2_error",
        (n - 2f64.sqrt()).abs(),
        Relation::Le,
        cfg.norm_tol,
    );
    let l1 = creation(&f, &XElement::delta(2, 0)).ctx("fock")?;
    let l2 = creation(&f, &XElement::delta(2, 1)).ctx("fock")?;
    let cross = operator_norm(&(&l1.adjoint() * &l2));
    r.metric("orthogonal_ranges_residual", cross);
    r.check("orthogonal_ranges_residual", cross, Relation::Le, cfg.structural_tol);
    r.artifact("row_defect", matrix_value(&defect));
    Ok(r)
}

fn graph_loop(settings: &Settings, params: &Value) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let max_cutoff = settings.cutoff.unwrap_or(count(params, "max_cutoff", 8)?);
    let mut r = ReportBuilder::new();
    let corr = Correspondence::Graph(Graph::bouquet(1));
    let cutoffs: Vec<usize> = (1..=max_cutoff).collect();
    let shift = TensorPoly::t(XElement::delta(1, 0));
    let shift_norms = toeplitz_norm_estimate(&corr, &shift, &cutoffs).ctx("fock")?;
    r.metric("shift_norms", shift_norms.clone());
    r.check(
        "shift_norm_error",
        max_of(shift_norms.iter().map(|v| (v - 1.0).abs())),
        Relation::Le,
        cfg.norm_tol,
    );

    let one_plus_t = TensorPoly::new(vec![AElement::from_scalars(&[C_ONE])], vec![XElement::delta(1, 0)])
        .with_term(C_ONE, vec![])
        .with_term(C_ONE, vec![Symbol::T(0)]);
    let norms = toeplitz_norm_estimate(&corr, &one_plus_t, &cutoffs).ctx("fock")?;
    let exact: Vec<f64> = cutoffs
        .iter()
        .map(|&n| 2.0 * (std::f64::consts::PI / (2 * n + 3) as f64).cos())
        .collect();
    r.metric("one_plus_t_norms", norms.clone());
    r.check(
        "one_plus_t_closed_form_error",
        max_of(norms.iter().zip(&exact).map(|(a, b)| (a - b).abs())),
        Relation::Le,
        cfg.norm_tol,
    );
    let monotone = norms.windows(2).all(|w| w[1] >= w[0] - cfg.norm_tol);
    r.require("one_plus_t_norms_monotone", monotone);
    r.check(
        "one_plus_t_below_limit",
        max_of(norms.iter().copied()),
        Relation::Le,
        2.0,
    );
    Ok(r)
}

fn shilov_metrics(r: &mut ReportBuilder, res: &ShilovResult) {
    r.metric("block_dims", res.block_dims.clone())
        .metric("multiplicities", res.multiplicities.clone())
        .metric("deletable", res.deletable.clone())
        .metric("envelope_dims", res.envelope_dims.clone())
        .metric("deletions_evaluated", res.deletions.len())
        .metric("exhaustive", res.exhaustive)
        .metric("maximal", res.maximal)
        .metric("levels", res.levels);
    if let Some(u) = res.unique_maximal {
        r.metric("unique_maximal", u);
    }
    if res.flagged {
        r.flag("a deletion deficit fell in the undecided band (norm_tol, 10 norm_tol]");
    }
}

fn search(s: &UnitalSubspace, settings: &Settings) -> CliResult<ShilovResult> {
    let mut ctx = EnvelopeContext::with_levels(s, settings.levels, &settings.cfg).ctx("envelope")?;
    shilov_search_in(&mut ctx).ctx("envelope")
}

fn fdoa_roots(settings: &Settings, params: &Value) -> CliResult<ReportBuilder> {
    let n = payload::usize_of(payload::field(params, "n", "params")?, "params.n")?;
    if n < 2 {
        return Err(CliError::Validation(format!("fdoa-roots needs N >= 2, got {n}")));
    }
    let mut r = ReportBuilder::new();
    let s = roots_of_unity_subspace(n, &settings.cfg).ctx("envelope")?;
    let res = search(&s, settings)?;
    r.metric("n", n);
    shilov_metrics(&mut r, &res);
    let min_deficit = res
        .deletions
        .iter()
        .filter(|(deleted, _)| !deleted.is_empty())
        .map(|(_, d)| d.deficit)
        .fold(f64::INFINITY, f64::min);
    r.metric("min_deletion_deficit", min_deficit);
    r.check("deletable_count", res.deletable.len() as f64, Relation::Le, 0.0);
    r.check("min_deletion_deficit", min_deficit, Relation::Gt, 0.05);
    r.require(
        "summands_are_points",
        res.block_dims.iter().all(|&d| d == 1) && res.block_dims.len() == n,
    );
    Ok(r)
}

fn m2_envelope(settings: &Settings, _params: &Value) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let mut r = ReportBuilder::new();
    let scalars = UnitalSubspace::new(1, &[], cfg).ctx("envelope")?;
    let upper = UnitalSubspace::new(2, &[ComplexMatrix::unit(2, 0, 1)], cfg).ctx("envelope")?;
    let cases: Vec<(&str, UnitalSubspace)> = vec![
        ("full_m2", full_matrix_subspace(2, cfg).ctx("envelope")?),
        ("roots_4", roots_of_unity_subspace(4, cfg).ctx("envelope")?),
        ("corner", corner_subspace(cfg).ctx("envelope")?),
        ("scalars_m1", scalars),
        ("upper_m2", upper),
    ];
    for (name, s) in &cases {
        let rep = m2_envelope_check(s, cfg).ctx("envelope")?;
        let mut sub = ReportBuilder::new();
        sub.metric("envelope_dims_s", rep.s.envelope_dims.clone())
            .metric("envelope_dims_a_s", rep.a_s.envelope_dims.clone())
            .metric("cstar_dim_s", rep.cstar_dim_s)
            .metric("cstar_dim_a_s", rep.cstar_dim_a_s)
            .metric("deletable_s", rep.s.deletable.clone())
            .metric("deletable_a_s", rep.a_s.deletable.clone());
        sub.require("doubled", rep.doubled);
        sub.require("deletions_match", rep.deletions_match);
        sub.require("cstar_dim_quadrupled", rep.cstar_dim_a_s == 4 * rep.cstar_dim_s);
        if rep.s.flagged || rep.a_s.flagged {
            sub.flag("undecided deficit band reached");
        }
        if rep.s.block_dims.len() <= 4 {
            sub.require(
                "exhaustive_maximal",
                rep.s.exhaustive && rep.s.unique_maximal == Some(true),
            );
        }
        r.absorb(name, sub);
    }

    for m in [2, 3] {
        let res = search(&full_matrix_subspace(m, cfg).ctx("envelope")?, settings)?;
        r.check(
            &format!("full_m{m}.deletable_count"),
            res.deletable.len() as f64,
            Relation::Le,
            0.0,
        );
    }

    let c2 = generate_algebra(&[ComplexMatrix::unit(2, 0, 0), ComplexMatrix::unit(2, 1, 1)], true, cfg).ctx("opalg")?;
    let m2 = generate_algebra(&[ComplexMatrix::unit(2, 0, 1), ComplexMatrix::unit(2, 1, 0)], true, cfg).ctx("opalg")?;
    let mixed_gens: Vec<ComplexMatrix> = std::iter::once(ComplexMatrix::unit(3, 0, 0))
        .chain((0..4).map(|k| ComplexMatrix::unit(3, 1 + k / 2, 1 + k % 2)))
        .collect();
    let mixed = generate_algebra(&mixed_gens, true, cfg).ctx("opalg")?;
    for (name, a) in [("c2", &c2), ("m2", &m2), ("c_plus_m2", &mixed)] {
        let ok = ideal_lattice_m2_check(a, cfg).ctx("envelope")?;
        r.require(&format!("ideal_lattice.{name}"), ok);
    }
    Ok(r)
}

/// Block upper-triangular patterns on `M_6`, conjugated by a seeded unitary.
const PATTERNS: &[&[usize]] = &[&[2, 2, 2], &[3, 3], &[1, 2, 3], &[1, 1, 1, 1, 1, 1], &[2, 4]];

pub fn structured_generators(seed: u64, j: usize, m: usize) -> Vec<ComplexMatrix> {
    let mut rng = rng_for(seed, 0x00fd_0000 + j as u64);
    let pattern: Vec<usize> = if m == 6 {
        PATTERNS[j % PATTERNS.len()].to_vec()
    } else {
        let mut p = vec![1; m % 2];
        p.extend(std::iter::repeat_n(2, m / 2));
        p
    };
    let block_of: Vec<usize> = pattern
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect();
    let u = random_unitary(m, &mut rng);
    (0..1 + j % 3)
        .map(|_| {
            let g = ComplexMatrix::from_fn(m, m, |i, k| {
                if block_of[i] <= block_of[k] {
                    random_complex(&mut rng)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            &(&u * &g) * &u.adjoint()
        })
        .collect()
}

/// All words of length `1..=max_len` over the letters `gᵢ` and `gᵢ*`.
pub fn all_words<R: rand::Rng + ?Sized>(gens: &[ComplexMatrix], max_len: usize, rng: &mut R) -> Vec<WordSpec> {
    let letters: Vec<(Source, &ComplexMatrix)> = gens
        .iter()
        .flat_map(|g| [(Source::Plain, g), (Source::Adjoint, g)])
        .collect();
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for l in 0..letters.len() {
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        for w in &next {
            let factors = w.iter().map(|&l| (letters[l].0, letters[l].1.clone())).collect();
            out.push(WordSpec::new(factors, random_complex(rng)));
        }
        frontier = next;
    }
    out
}

fn fdim_norm_attain(settings: &Settings, params: &Value) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let algebras = count(params, "algebras", 20)?;
    let mut r = ReportBuilder::new();
    let mut gap: f64 = 0.0;
    let mut mult: f64 = 0.0;
    let mut identity: f64 = 0.0;
    let mut max_dim_f = 0;
    let mut alg_dims = Vec::new();
    for j in 0..algebras {
        let gens = structured_generators(cfg.rng_seed, j, 6);
        let alg = generate_algebra(&gens, true, cfg).ctx("opalg")?;
        alg_dims.push(alg.dim());
        let mut rng = rng_for(cfg.rng_seed, 0x00fe_0000 + j as u64);
        for d in 1..=2 {
            let a = SquareArray::from_fn(d, |_, _| alg.random_element(&mut rng));
            let rep = norm_attaining_compression(&alg, &a, cfg).ctx("compress")?;
            gap = gap.max(rep.norm_gap().abs());
            mult = mult.max(rep.multiplicativity_residual);
            max_dim_f = max_dim_f.max(rep.dim_f);
        }
        let letters = &gens[..gens.len().min(2)];
        let words = all_words(letters, 4, &mut rng);
        let xi = vec![random_vector(6, &mut rng)];
        let rep = invariant_compression(&alg, &words, &xi, cfg).ctx("compress")?;
        identity = identity.max(rep.identity_residual);
    }
    r.metric("algebras", algebras)
        .metric("algebra_dims", alg_dims)
        .metric("max_norm_gap", gap)
        .metric("max_multiplicativity_residual", mult)
        .metric("max_identity_residual", identity)
        .metric("max_dim_f", max_dim_f);
    r.check("max_norm_gap", gap, Relation::Le, cfg.norm_tol);
    r.check(
        "max_multiplicativity_residual",
        mult,
        Relation::Le,
        10.0 * cfg.structural_tol,
    );
    r.check("max_identity_residual", identity, Relation::Le, cfg.structural_tol);
    Ok(r)
}

fn bimodule(settings: &Settings, params: &Value) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let algebras = count(params, "algebras", 10)?;
    let samples = count(params, "samples", 10)?;
    let mut r = ReportBuilder::new();
    let mut bimod: f64 = 0.0;
    let mut hom: f64 = 0.0;
    let mut cert_gap = f64::NEG_INFINITY;
    for j in 0..algebras {
        let m = 4 + j % 3;
        let gens = structured_generators(cfg.rng_seed, 100 + j, m);
        let alg = generate_algebra(&gens, true, cfg).ctx("opalg")?;
        let mut rng = rng_for(cfg.rng_seed, 0x0b1d_0000 + j as u64);
        let xi: Vec<_> = (0..1 + j % 2).map(|_| random_vector(m, &mut rng)).collect();
        let rho = bimodule_compression(&alg, &xi, samples, cfg).ctx("compress")?;
        bimod = bimod.max(rho.bimodule_residual);
        hom = hom.max(rho.homomorphism_residual);

        let t = SquareArray::from_fn(2, |_, _| alg.random_element(&mut rng));
        let big = ampliate(&t).ctx("linalg")?;
        let zeta = maximizing_vector(&big).ctx("compress")?;
        let cert = certifying_xi(&t, &zeta).ctx("compress")?;
        let rho = bimodule_compression(&alg, &cert, 0, cfg).ctx("compress")?;
        cert_gap = cert_gap.max(operator_norm(&big) - operator_norm(&rho.apply_array(&t)));
    }
    r.metric("triples", algebras * samples)
        .metric("max_bimodule_residual", bimod)
        .metric("max_homomorphism_residual", hom)
        .metric("max_certified_norm_gap", cert_gap);
    r.check("max_bimodule_residual", bimod, Relation::Le, cfg.structural_tol);
    r.check("max_homomorphism_residual", hom, Relation::Le, cfg.structural_tol);
    r.check("max_certified_norm_gap", cert_gap, Relation::Le, cfg.norm_tol);
    Ok(r)
}

/// Sample `k` of the hyponormal suite: normal, Gaussian, weighted shift, or normal plus small noise.
pub fn hyponormal_sample(seed: u64, k: usize) -> ComplexMatrix {
    let mut rng = rng_for(seed, 0x4790_0000 + k as u64);
    match k % 4 {
        0 => {
            let u = random_unitary(4, &mut rng);
            let d = ComplexMatrix::diag(&(0..4).map(|_| random_complex(&mut rng)).collect::<Vec<_>>());
            &(&u * &d) * &u.adjoint()
        }
        1 => random_matrix(4, 4, &mut rng),
        2 => ComplexMatrix::from_fn(4, 4, |i, j| {
            if j + 1 == i {
                Complex64::new(uniform(0.0, 2.0, &mut rng), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
        _ => {
            let u = random_unitary(4, &mut rng);
            let d = ComplexMatrix::diag(&(0..4).map(|_| random_complex(&mut rng)).collect::<Vec<_>>());
            let eps = 10f64.powf(-uniform(5.0, 14.0, &mut rng));
            &(&(&u * &d) * &u.adjoint()) + &random_matrix(4, 4, &mut rng).scale_real(eps)
        }
    }
}

fn hyponormal(settings: &Settings, params: &Value) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let samples = count(params, "samples", 10_000)?;
    let mut r = ReportBuilder::new();
    let mut passing = 0usize;
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let a = hyponormal_sample(cfg.rng_seed, k);
        let (hypo, norm) = hyponormal_defect(&a, cfg).ctx("opalg")?;
        if hypo {
            passing += 1;
            worst = worst.max(norm);
        }
    }
    r.metric("samples", samples)
        .metric("hyponormal_count", passing)
        .metric("max_hyponormal_commutator_norm", worst);
    r.check("max_hyponormal_commutator_norm", worst, Relation::Le, 1e-9);
    r.check("hyponormal_count", passing as f64, Relation::Gt, 0.0);
    Ok(r)
}

pub const SUBGRAPH_CASES: &[(&str, &str, &[&str])] = &[
    ("disjoint_loops", "vertex u\nvertex v\nedge a u u\nedge b v v\n", &["u"]),
    (
        "two_vertex",
        "vertex u\nvertex v\nedge a u u\nedge b u v\nedge c v u\n",
        &["u"],
    ),
];

fn subgraph(settings: &Settings, params: &Value) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let cutoff = settings.cutoff.unwrap_or(4);
    let samples = count(params, "samples", 20)?;
    let mut r = ReportBuilder::new();
    for (name, text, labels) in SUBGRAPH_CASES {
        let g = Graph::parse(text).ctx("fock")?;
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let res = subgraph_restriction(&g, &labels, cutoff, samples, cfg).ctx("fock")?;
        let mut sub = ReportBuilder::new();
        sub.metric("isometry_deficit", res.isometry_deficit)
            .metric("generator_residual", res.generator_residual)
            .metric("multiplicativity_residual", res.multiplicativity_residual);
        sub.check(
            "isometry_deficit",
            res.isometry_deficit,
            Relation::Le,
            10.0 * cfg.structural_tol,
        );
        sub.check(
            "generator_residual",
            res.generator_residual,
            Relation::Le,
            cfg.structural_tol,
        );
        sub.check(
            "multiplicativity_residual",
            res.multiplicativity_residual,
            Relation::Le,
            cfg.structural_tol,
        );
        sub.require("leaving_edges_zero", res.leaving_edges_zero);
        sub.artifact("isometry", matrix_value(&res.isometry));
        r.absorb(name, sub);
    }
    Ok(r)
}

/// Algebra on `constant(2, 3)` generated by zero-tail matrix units supported at block 2.
pub fn matrix_unit_block_algebra(cfg: &ToleranceConfig) -> opalg_core::Result<BlockAlgebra> {
    let p = BlockProfile::constant(2, 3)?;
    let gens = (0..4)
        .map(|k| {
            BlockElement::from_fn(p, TailTemplate::zero(), |n| {
                if n == 2 {
                    ComplexMatrix::unit(2, k / 2, k % 2)
                } else {
                    ComplexMatrix::zeros(2, 2)
                }
            })
        })
        .collect::<opalg_core::Result<Vec<_>>>()?;
    BlockAlgebra::generate(p, gens, true, cfg)
}

fn epssurj(settings: &Settings, _params: &Value) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let levels = settings.levels.unwrap_or(2);
    let mut r = ReportBuilder::new();
    let s6 =
        BlockAlgebra::generate(BlockProfile::linear(4), t_generators(2).ctx("blockseq")?, true, cfg).ctx("blockseq")?;
    let res = gamma_quotient_surjectivity(&s6, 2, levels, cfg).ctx("blockseq")?;
    r.metric("section6.image_dim", res.image_dim)
        .metric("section6.target_dim", res.target_dim);
    r.require("section6.not_surjective", !res.surjective);

    let alg = matrix_unit_block_algebra(cfg).ctx("blockseq")?;
    let res = gamma_quotient_surjectivity(&alg, 2, levels, cfg).ctx("blockseq")?;
    let deficit = res.deficit.unwrap_or(f64::INFINITY);
    r.metric("matrix_units.image_dim", res.image_dim)
        .metric("matrix_units.deficit", deficit)
        .metric("matrix_units.targets", res.targets);
    r.require("matrix_units.surjective", res.surjective);
    r.check("matrix_units.deficit", deficit, Relation::Le, cfg.norm_tol);
    Ok(r)
}

pub const COVARIANCE_GRAPHS: &[&str] = &[
    "vertex u\nedge a u u\n",
    "vertex u\nvertex v\nedge a u v\nedge b v u\nedge c u u\n",
    "vertex u\nvertex v\nvertex w\nedge a u v\nedge b v w\nedge c w u\nedge d u u\n",
];

fn fock_covariance(settings: &Settings, params: &Value) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let samples = count(params, "samples", 50)?;
    let mut r = ReportBuilder::new();
    let mut spaces: Vec<(String, TruncatedFockSpace)> = Vec::new();
    for (k, text) in COVARIANCE_GRAPHS.iter().enumerate() {
        let g = Graph::parse(text).ctx("fock")?;
        spaces.push((
            format!("graph_{k}"),
            TruncatedFockSpace::new(Correspondence::Graph(g), 4).ctx("fock")?,
        ));
    }
    spaces.push((
        "free_2".into(),
        TruncatedFockSpace::new(Correspondence::Free(2), 4).ctx("fock")?,
    ));
    let m2 = FiniteCStarAlgebra::uniform(vec![2]).ctx("fock")?;
    spaces.push((
        "self_m2".into(),
        TruncatedFockSpace::new(Correspondence::SelfOverA(m2), 3).ctx("fock")?,
    ));
    for (name, f) in &spaces {
        let res = covariance_residuals(f, samples, cfg).ctx("fock")?;
        let mut sub = ReportBuilder::new();
        sub.metric("left", res.left)
            .metric("right", res.right)
            .metric("inner", res.inner);
        sub.check("max_residual", res.max(), Relation::Le, cfg.structural_tol);
        r.absorb(name, sub);
    }
    Ok(r)
}

pub const RFD_GRAPH: &str = "vertex u\nvertex v\nedge a u u\nedge b u v\nedge c v u\n";

fn tensor_rfd(settings: &Settings, params: &Value) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let polys = count(params, "polys", 10)?;
    let cutoff = settings.cutoff.unwrap_or(4);
    let mut r = ReportBuilder::new();
    let corr = Correspondence::Graph(Graph::parse(RFD_GRAPH).ctx("fock")?);
    let f = TruncatedFockSpace::new(corr.clone(), cutoff).ctx("fock")?;
    let mut gap: f64 = 0.0;
    let mut cov: f64 = 0.0;
    let mut dims = Vec::new();
    for j in 0..polys {
        let mut rng = rng_for(cfg.rng_seed, 0x7e05_0000 + j as u64);
        let s = SquareArray::single(random_tensor_poly(&corr, 2, 3, &mut rng));
        let c = rfd_compression_tensor(&f, &s, cfg).ctx("fock")?;
        gap = gap.max(c.report.norm_gap().abs());
        cov = cov.max(c.covariance_residual());
        dims.push(c.report.dim_f);
    }
    r.metric("fock_dim", f.dim())
        .metric("compressed_dims", dims)
        .metric("max_norm_gap", gap)
        .metric("max_covariance_residual", cov);
    r.check("max_norm_gap", gap, Relation::Le, cfg.norm_tol);
    r.check("max_covariance_residual", cov, Relation::Le, 10.0 * cfg.structural_tol);
    Ok(r)
}
