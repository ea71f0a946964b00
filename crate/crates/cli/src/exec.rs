//! Dispatch of scenario kinds to core operations.

use serde_json::Value;

use opalg_core::blockseq::{norm_attaining_block, quotient_norm, strict_kappa_gap, sup_norm};
use opalg_core::compress::{
    bimodule_compression, certifying_xi, invariant_compression, maximizing_vector, norm_attaining_compression,
    word_norm_compression,
};
use opalg_core::envelope::m2_envelope_check;
use opalg_core::fock::{covariance_residuals, row_defect, subgraph_restriction, toeplitz_norm_estimate};
use opalg_core::linalg::{ampliate, min_eigenvalue, operator_norm};
use opalg_core::opalg::{generate_algebra_in, level_norm, FiniteOperatorAlgebra};
use opalg_core::{CompressionReport, Correspondence, SquareArray, TruncatedFockSpace, UnitalSubspace, WordSpec};

use crate::builtins;
use crate::error::{CliError, CliResult, Context};
use crate::payload::*;
use crate::report::{Relation, Report, ReportBuilder};
use crate::scenario::{Kind, Scenario, Settings};

pub fn execute(s: &Scenario, settings: &Settings) -> CliResult<Report> {
    let p = &s.payload;
    let builder = match s.kind {
        Kind::Norm => norm(p)?,
        Kind::QuotientNorm => quotient(p, settings)?,
        Kind::Compress => compress(p, settings)?,
        Kind::Bimodule => bimodule(p, settings)?,
        Kind::Fock => fock(p, s, settings)?,
        Kind::Subgraph => subgraph(p, s, settings)?,
        Kind::Envelope => envelope(p, settings)?,
        Kind::Builtin => {
            let name = str_of(field(p, "name", "payload")?, "payload.name")?;
            let params = opt_field(p, "params").cloned().unwrap_or(Value::Null);
            builtins::run_builtin(name, settings, &params)?
        }
    };
    Ok(builder.finish(&s.name, s.kind.as_str(), &settings.cfg, settings.emit))
}

fn expect(r: &mut ReportBuilder, p: &Value, name: &str, value: f64, tol: f64) -> CliResult<()> {
    if let Some(e) = opt_field(p, &format!("expected_{name}")) {
        let e = f64_of(e, &format!("payload.expected_{name}"))?;
        r.check(&format!("{name}_error"), (value - e).abs(), Relation::Le, tol);
    }
    Ok(())
}

fn norm(p: &Value) -> CliResult<ReportBuilder> {
    let a = matrix_array(p, "payload")?;
    let tol = opt_field(p, "tolerance").map_or(Ok(1e-8), |t| f64_of(t, "payload.tolerance"))?;
    let n = level_norm(&a).ctx("linalg")?;
    let mut r = ReportBuilder::new();
    r.metric("level", a.size()).metric("norm", n);
    expect(&mut r, p, "norm", n, tol)?;
    Ok(r)
}

fn block_array(p: &Value) -> CliResult<SquareArray<opalg_core::BlockElement>> {
    let prof = profile(field(p, "profile", "payload")?, "payload.profile")?;
    if let Some(e) = opt_field(p, "element") {
        return Ok(SquareArray::single(block_element(e, prof, "payload.element")?));
    }
    square_array(field(p, "array", "payload")?, "payload.array", |v, path| {
        block_element(v, prof, path)
    })
}

fn quotient(p: &Value, settings: &Settings) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let a = block_array(p)?;
    let q = quotient_norm(&a).ctx("blockseq")?;
    let s = sup_norm(&a).ctx("blockseq")?;
    let (gap, strict) = strict_kappa_gap(&a, cfg).ctx("blockseq")?;
    let attained = norm_attaining_block(&a, cfg).ctx("blockseq")?;
    let mut r = ReportBuilder::new();
    r.metric("quotient_norm", q)
        .metric("sup_norm", s)
        .metric("kappa_gap", gap)
        .metric("strict_gap", strict)
        .metric("norm_attaining_block", attained.map_or(Value::Null, Value::from));
    expect(&mut r, p, "quotient_norm", q, cfg.norm_tol)?;
    expect(&mut r, p, "sup_norm", s, cfg.norm_tol)?;
    r.check("quotient_below_sup", q - s, Relation::Le, cfg.norm_tol);
    Ok(r)
}

fn algebra(p: &Value, settings: &Settings) -> CliResult<FiniteOperatorAlgebra> {
    let gens = matrices(field(p, "generators", "payload")?, "payload.generators")?;
    let unital = opt_field(p, "unital").map_or(Ok(true), |u| bool_of(u, "payload.unital"))?;
    let m = match (opt_field(p, "ambient_dim"), gens.first()) {
        (Some(m), _) => usize_of(m, "payload.ambient_dim")?,
        (None, Some(g)) => g.rows(),
        (None, None) => {
            return Err(CliError::Validation(
                "payload: ambient_dim is required when generators is empty".into(),
            ))
        }
    };
    generate_algebra_in(m, &gens, unital, &settings.cfg).ctx("opalg")
}

fn vectors(v: &Value, path: &str) -> CliResult<Vec<Vec<num_complex::Complex64>>> {
    array_of(v, path)?
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let p = format!("{path}[{k}]");
            array_of(x, &p)?.iter().map(|c| complex(c, &p)).collect()
        })
        .collect()
}

/// `[{"coefficient": c, "factors": [{"matrix": M, "adjoint": false}, …]}, …]`.
fn words(v: &Value, path: &str) -> CliResult<Vec<WordSpec>> {
    array_of(v, path)?
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let p = format!("{path}[{k}]");
            let c = opt_field(w, "coefficient").map_or(Ok(opalg_core::linalg::C_ONE), |c| complex(c, &p))?;
            let factors = array_of(field(w, "factors", &p)?, &p)?
                .iter()
                .enumerate()
                .map(|(j, f)| {
                    let fp = format!("{p}.factors[{j}]");
                    let m = matrix(field(f, "matrix", &fp)?, &format!("{fp}.matrix"))?;
                    let adj = opt_field(f, "adjoint").map_or(Ok(false), |a| bool_of(a, &fp))?;
                    let src = if adj {
                        opalg_core::Source::Adjoint
                    } else {
                        opalg_core::Source::Plain
                    };
                    Ok((src, m))
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok(WordSpec::new(factors, c))
        })
        .collect()
}

fn compression_metrics(r: &mut ReportBuilder, rep: &CompressionReport, settings: &Settings) {
    let cfg = &settings.cfg;
    r.metric("ambient_dim", rep.ambient_dim)
        .metric("dim_f", rep.dim_f)
        .metric("norm_original", rep.norm_original)
        .metric("norm_compressed", rep.norm_compressed)
        .metric("identity_residual", rep.identity_residual)
        .metric("invariance_residual", rep.invariance_residual)
        .metric("multiplicativity_residual", rep.multiplicativity_residual);
    r.check(
        "identity_residual",
        rep.identity_residual,
        Relation::Le,
        cfg.structural_tol,
    );
    r.check(
        "multiplicativity_residual",
        rep.multiplicativity_residual,
        Relation::Le,
        10.0 * cfg.structural_tol,
    );
    r.artifact("subspace_basis", matrix_value(&rep.subspace_basis));
    for (name, m) in &rep.compressed_ops {
        r.artifact(name, matrix_value(m));
    }
}

fn compress(p: &Value, settings: &Settings) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let alg = algebra(p, settings)?;
    let mode = opt_field(p, "mode").map_or(Ok("norm-attaining"), |m| str_of(m, "payload.mode"))?;
    let mut r = ReportBuilder::new();
    r.metric("algebra_dim", alg.dim());
    match mode {
        "norm-attaining" => {
            let a = matrix_array(p, "payload")?;
            let rep = norm_attaining_compression(&alg, &a, cfg).ctx("compress")?;
            compression_metrics(&mut r, &rep, settings);
            r.check("norm_gap", rep.norm_gap().abs(), Relation::Le, cfg.norm_tol);
        }
        "invariant" => {
            let w = words(field(p, "words", "payload")?, "payload.words")?;
            let xi = vectors(field(p, "xi", "payload")?, "payload.xi")?;
            let rep = invariant_compression(&alg, &w, &xi, cfg).ctx("compress")?;
            compression_metrics(&mut r, &rep, settings);
            r.check(
                "invariance_residual",
                rep.invariance_residual,
                Relation::Le,
                cfg.structural_tol,
            );
        }
        "word-norm" => {
            let w = words(field(p, "words", "payload")?, "payload.words")?;
            let rep = word_norm_compression(&alg, &w, cfg).ctx("compress")?;
            compression_metrics(&mut r, &rep, settings);
            r.check("norm_gap", rep.norm_gap().abs(), Relation::Le, cfg.norm_tol);
        }
        other => {
            return Err(CliError::Validation(format!(
                "payload.mode: unknown mode '{other}' (norm-attaining, invariant, word-norm)"
            )))
        }
    }
    Ok(r)
}

fn bimodule(p: &Value, settings: &Settings) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let alg = algebra(p, settings)?;
    let samples = usize_or(p, "samples", 20, "payload")?;
    let mut r = ReportBuilder::new();
    let (xi, target) = match opt_field(p, "xi") {
        Some(x) => (vectors(x, "payload.xi")?, None),
        None => {
            let a = matrix_array(p, "payload")?;
            let big = ampliate(&a).ctx("linalg")?;
            let zeta = maximizing_vector(&big).ctx("compress")?;
            (
                certifying_xi(&a, &zeta).ctx("compress")?,
                Some((a, operator_norm(&big))),
            )
        }
    };
    let rho = bimodule_compression(&alg, &xi, samples, cfg).ctx("compress")?;
    r.metric("dim", rho.dim())
        .metric("samples", rho.samples)
        .metric("bimodule_residual", rho.bimodule_residual)
        .metric("homomorphism_residual", rho.homomorphism_residual);
    r.check(
        "bimodule_residual",
        rho.bimodule_residual,
        Relation::Le,
        cfg.structural_tol,
    );
    r.check(
        "homomorphism_residual",
        rho.homomorphism_residual,
        Relation::Le,
        cfg.structural_tol,
    );
    if let Some((a, n)) = target {
        let c = operator_norm(&rho.apply_array(&a));
        r.metric("norm_original", n).metric("norm_compressed", c);
        r.check("certified_norm_gap", n - c, Relation::Le, cfg.norm_tol);
    }
    r.artifact("basis", matrix_value(&rho.basis));
    Ok(r)
}

fn fock(p: &Value, s: &Scenario, settings: &Settings) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let corr = correspondence(
        field(p, "correspondence", "payload")?,
        &s.base_dir,
        "payload.correspondence",
    )?;
    let cutoff = match settings.cutoff {
        Some(c) => c,
        None => usize_of(field(p, "cutoff", "payload")?, "payload.cutoff")?,
    };
    let samples = usize_or(p, "samples", 50, "payload")?;
    let f = TruncatedFockSpace::new(corr.clone(), cutoff).ctx("fock")?;
    let res = covariance_residuals(&f, samples, cfg).ctx("fock")?;
    let mut r = ReportBuilder::new();
    r.metric("cutoff", cutoff)
        .metric("dim", f.dim())
        .metric("level_dims", (0..=cutoff).map(|k| f.level_dim(k)).collect::<Vec<_>>())
        .metric("left_residual", res.left)
        .metric("right_residual", res.right)
        .metric("inner_residual", res.inner);
    r.check("covariance_residual", res.max(), Relation::Le, cfg.structural_tol);
    if let Correspondence::Free(_) = corr {
        let defect = row_defect(&f).ctx("fock")?;
        let e = min_eigenvalue(&defect, cfg).ctx("linalg")?;
        r.metric("row_defect_min_eigenvalue", e);
        r.check("row_defect_min_eigenvalue", e, Relation::Ge, -cfg.psd_tol);
    }
    if let Some(poly) = opt_field(p, "poly") {
        let poly = tensor_poly(poly, "payload.poly")?;
        let cutoffs = match opt_field(p, "norm_cutoffs") {
            Some(c) => usizes(c, "payload.norm_cutoffs")?,
            None => (1..=cutoff).collect(),
        };
        let norms = toeplitz_norm_estimate(&corr, &poly, &cutoffs).ctx("fock")?;
        let monotone = norms.windows(2).all(|w| w[1] >= w[0] - cfg.norm_tol);
        r.metric("norm_cutoffs", cutoffs).metric("poly_norms", norms);
        r.require("poly_norms_monotone", monotone);
    }
    Ok(r)
}

fn subgraph(p: &Value, s: &Scenario, settings: &Settings) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let g = read_graph(p, &s.base_dir, "payload")?;
    let labels = strings(field(p, "vertices", "payload")?, "payload.vertices")?;
    let cutoff = match settings.cutoff {
        Some(c) => c,
        None => usize_of(field(p, "cutoff", "payload")?, "payload.cutoff")?,
    };
    let samples = usize_or(p, "samples", 20, "payload")?;
    let res = subgraph_restriction(&g, &labels, cutoff, samples, cfg).ctx("fock")?;
    let mut r = ReportBuilder::new();
    r.metric("subgraph_vertices", res.subgraph.vertex_count())
        .metric("subgraph_edges", res.subgraph.edge_count())
        .metric("isometry_deficit", res.isometry_deficit)
        .metric("generator_residual", res.generator_residual)
        .metric("multiplicativity_residual", res.multiplicativity_residual)
        .metric("leaving_edges_zero", res.leaving_edges_zero);
    r.check(
        "isometry_deficit",
        res.isometry_deficit,
        Relation::Le,
        10.0 * cfg.structural_tol,
    );
    r.check(
        "generator_residual",
        res.generator_residual,
        Relation::Le,
        cfg.structural_tol,
    );
    r.check(
        "multiplicativity_residual",
        res.multiplicativity_residual,
        Relation::Le,
        cfg.structural_tol,
    );
    r.require("leaving_edges_zero", res.leaving_edges_zero);
    r.artifact("isometry", matrix_value(&res.isometry));
    Ok(r)
}

fn envelope(p: &Value, settings: &Settings) -> CliResult<ReportBuilder> {
    let cfg = &settings.cfg;
    let m = usize_of(field(p, "ambient_dim", "payload")?, "payload.ambient_dim")?;
    let spanning = matrices(field(p, "spanning", "payload")?, "payload.spanning")?;
    let s = UnitalSubspace::new(m, &spanning, cfg).ctx("envelope")?;
    let mut ctx = opalg_core::envelope::EnvelopeContext::with_levels(&s, settings.levels, cfg).ctx("envelope")?;
    let res = opalg_core::envelope::shilov_search_in(&mut ctx).ctx("envelope")?;
    let mut r = ReportBuilder::new();
    r.metric("subspace_dim", s.dim())
        .metric("block_dims", res.block_dims.clone())
        .metric("multiplicities", res.multiplicities.clone())
        .metric("deletable", res.deletable.clone())
        .metric("envelope_dims", res.envelope_dims.clone())
        .metric("exhaustive", res.exhaustive)
        .metric("maximal", res.maximal)
        .metric("levels", res.levels);
    if let Some(u) = res.unique_maximal {
        r.metric("unique_maximal", u);
    }
    r.metric(
        "deficits",
        res.deletions
            .iter()
            .map(|(del, d)| serde_json::json!({"deleted": del, "deficit": d.deficit, "confidence": d.confidence}))
            .collect::<Vec<_>>(),
    );
    if res.flagged {
        r.flag("a deletion deficit fell in the undecided band (norm_tol, 10 norm_tol]");
    }
    if let Some(e) = opt_field(p, "expected_deletable") {
        let e = usizes(e, "payload.expected_deletable")?;
        r.require("deletable_matches_expected", e == res.deletable);
    }
    if opt_field(p, "m2").map_or(Ok(false), |v| bool_of(v, "payload.m2"))? {
        let rep = m2_envelope_check(&s, cfg).ctx("envelope")?;
        r.metric("m2.envelope_dims_a_s", rep.a_s.envelope_dims.clone());
        r.require("m2.doubled", rep.doubled);
        r.require("m2.deletions_match", rep.deletions_match);
    }
    for (k, u) in (0..ctx.decomposition().len()).map(|i| (i, ctx.decomposition().summand_isometry(i))) {
        r.artifact(&format!("summand_isometry_{k}"), matrix_value(&u));
    }
    Ok(r)
}
