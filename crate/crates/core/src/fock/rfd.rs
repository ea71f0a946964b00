//! Finite-dimensional compressions of truncated tensor-algebra representations and
//! restriction of a graph Fock representation to an induced subgraph.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::poly::{random_tensor_poly, symbol_matrices};
use super::{creation, left_action, AElement, Correspondence, Graph, Symbol, TensorPoly, TruncatedFockSpace, XElement};
use crate::compress::{invariant_compression, maximizing_vector, CompressionReport, Source, WordSpec};
use crate::error::{Error, Result};
use crate::linalg::{
    ampliate, basis_vector, min_eigenvalue, operator_norm, random::rng_for, split_components, ComplexMatrix,
    SquareArray, ToleranceConfig, C_ONE, C_ZERO,
};
use crate::opalg::generate_algebra;

/// Compression of `(ρ_∞, t_∞)` to a `ρ(𝔄)`-reducing, `t*`-invariant subspace, with the
/// relations it retains.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorCompression {
    pub report: CompressionReport,
    /// `max ‖ρ_F(a) t_F(x) − t_F(φ(a)x)‖` over the sampled pairs.
    pub left_residual: f64,
    /// `max ‖t_F(x) ρ_F(a) − t_F(x·a)‖`.
    pub right_residual: f64,
    /// Smallest eigenvalue of `[ρ_F⟨xᵢ, xⱼ⟩ − t_F(xᵢ)* t_F(xⱼ)]`; nonnegative for a
    /// completely contractive covariant pair.
    pub contractivity_min_eigenvalue: f64,
}

impl TensorCompression {
    /// Largest defect among the covariance relations, counting a negative
    /// contractivity eigenvalue as a defect.
    pub fn covariance_residual(&self) -> f64 {
        self.left_residual
            .max(self.right_residual)
            .max((-self.contractivity_min_eigenvalue).max(0.0))
            .max(self.report.multiplicativity_residual)
    }
}

fn poly_words(poly: &TensorPoly, rho: &[ComplexMatrix], t: &[ComplexMatrix]) -> Vec<WordSpec> {
    poly.terms
        .iter()
        .map(|(c, word)| {
            let factors = word
                .iter()
                .map(|s| match *s {
                    Symbol::Rho(i) => (Source::Plain, rho[i].clone()),
                    Symbol::T(j) => (Source::Plain, t[j].clone()),
                })
                .collect();
            WordSpec::new(factors, *c)
        })
        .collect()
}

fn compressed_sum(words: &[WordSpec], q: &ComplexMatrix) -> ComplexMatrix {
    words.iter().fold(ComplexMatrix::zeros(q.cols(), q.cols()), |acc, w| {
        &acc + &w.compressed(q)
    })
}

/// Norm-attaining compression of `S ∈ M_d(𝒯⁰_X)` at the truncation `f`.
///
/// `Ξ` is the set of components of a maximizing vector of `S`; `F` is the span of `Ξ`
/// and every suffix of every word of `S` applied to `Ξ`, saturated under `ρ(𝔄)` and
/// `t(X)*`. Co-invariance makes the compression multiplicative on `𝒯⁺_X`, so the
/// compressed norm equals the truncated one rather than merely bounding it.
pub fn rfd_compression_tensor(
    f: &TruncatedFockSpace,
    s: &SquareArray<TensorPoly>,
    cfg: &ToleranceConfig,
) -> Result<TensorCompression> {
    let corr = f.correspondence();
    let coeff = corr.coefficients();
    let n = f.dim();
    let d = s.size();

    let mut entry_words = Vec::with_capacity(d * d);
    for poly in s.entries() {
        let (rho, t) = symbol_matrices(f, poly)?;
        entry_words.push(poly_words(poly, &rho, &t));
    }
    let entries = entry_words
        .iter()
        .map(|words| {
            words
                .iter()
                .fold(ComplexMatrix::zeros(n, n), |acc, w| &acc + &w.evaluate(n))
        })
        .collect::<Vec<_>>();
    let big = ampliate(&SquareArray::new(d, entries)?)?;
    let xi = match maximizing_vector(&big) {
        Ok(z) => split_components(&z, d),
        Err(_) => vec![basis_vector(n, 0)],
    };
    let units = coeff.matrix_units();
    let mut gens = units.iter().map(|a| left_action(f, a)).collect::<Result<Vec<_>>>()?;
    for k in 0..corr.x_dim() {
        gens.push(creation(f, &XElement::delta(corr.x_dim(), k))?.adjoint());
    }
    let alg = generate_algebra(&gens, true, cfg)?;
    let all_words: Vec<WordSpec> = entry_words.iter().flatten().cloned().collect();
    let mut report = invariant_compression(&alg, &all_words, &xi, cfg)?;
    let q = report.subspace_basis.clone();

    let compressed = SquareArray::new(d, entry_words.iter().map(|w| compressed_sum(w, &q)).collect())?;
    report.norm_original = operator_norm(&big);
    report.norm_compressed = operator_norm(&ampliate(&compressed)?);
    report.compressed_ops = (0..d * d)
        .map(|k| (format!("s_{}_{}", k / d, k % d), compressed.entries()[k].clone()))
        .collect();

    // Covariance of the compressed pair on the tables, matrix units and edge deltas.
    let mut xs: Vec<XElement> = (0..corr.x_dim()).map(|k| XElement::delta(corr.x_dim(), k)).collect();
    let mut as_: Vec<AElement> = units;
    for poly in s.entries() {
        xs.extend(poly.x_table.iter().cloned());
        as_.extend(poly.a_table.iter().cloned());
    }
    let rho_f = |a: &AElement| -> Result<ComplexMatrix> { Ok(left_action(f, a)?.compress(&q)) };
    let t_f = |x: &XElement| -> Result<ComplexMatrix> { Ok(creation(f, x)?.compress(&q)) };
    let txs = xs.iter().map(t_f).collect::<Result<Vec<_>>>()?;
    let mut left_residual: f64 = 0.0;
    let mut right_residual: f64 = 0.0;
    for a in &as_ {
        let ra = rho_f(a)?;
        let scale = 1.0 + a.norm();
        for (x, tx) in xs.iter().zip(&txs) {
            let l = &(&ra * tx) - &t_f(&corr.left(a, x))?;
            let r = &(tx * &ra) - &t_f(&corr.right(x, a))?;
            let sc = scale * (1.0 + operator_norm(tx));
            left_residual = left_residual.max(operator_norm(&l) / sc);
            right_residual = right_residual.max(operator_norm(&r) / sc);
        }
    }
    let k = xs.len();
    let gram = SquareArray::from_fn(k, |i, j| {
        let inner = rho_f(&corr.inner(&xs[i], &xs[j])).expect("inner product lies in the coefficient algebra");
        &inner - &(&txs[i].adjoint() * &txs[j])
    });
    let gram = ampliate(&gram)?.hermitian_part();
    let contractivity_min_eigenvalue = if gram.rows() == 0 {
        0.0
    } else {
        min_eigenvalue(&gram, cfg)?
    };
    Ok(TensorCompression {
        report,
        left_residual,
        right_residual,
        contractivity_min_eigenvalue,
    })
}

/// Restriction `π_F(s) = V* s V` of the `G` Fock truncation to the paths of the subgraph
/// induced on `F`, with its verification on generators and sampled elements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubgraphRestriction {
    pub subgraph: Graph,
    /// `γ_F`: each vertex of `G` to its index in the subgraph, or `None` when killed.
    pub vertex_images: Vec<Option<usize>>,
    /// `δ_F`: each edge of `G` to its index in the subgraph, or `None` when killed.
    pub edge_images: Vec<Option<usize>>,
    /// Isometry from the subgraph path space into the path space of `G`.
    pub isometry: ComplexMatrix,
    /// `max ‖π_F(generator) − generator image‖` over all `ρ(δ_v)` and `t(δ_e)`.
    pub generator_residual: f64,
    /// Whether every `t(δ_e)` with `e ∉ E_F` maps to the zero matrix exactly.
    pub leaving_edges_zero: bool,
    pub multiplicativity_residual: f64,
    /// `max (‖s‖_G − ‖π_F(s)‖_H)` over the sampled elements.
    pub isometry_deficit: f64,
    pub samples: usize,
}

impl SubgraphRestriction {
    pub fn apply(&self, s: &ComplexMatrix) -> ComplexMatrix {
        s.compress(&self.isometry)
    }
}

fn lift_a(a: &AElement, vmap: &[usize], vertices: usize) -> AElement {
    let mut vals = vec![C_ZERO; vertices];
    for (local, &v) in vmap.iter().enumerate() {
        vals[v] = a.blocks[local][(0, 0)];
    }
    AElement::from_scalars(&vals)
}

fn lift_x(x: &XElement, emap: &[usize], edges: usize) -> XElement {
    let mut coords = vec![C_ZERO; edges];
    for (local, &e) in emap.iter().enumerate() {
        coords[e] = x.coords[local];
    }
    XElement::new(coords)
}

/// Restriction to the subgraph induced on the vertices labelled `f_labels`, at cutoff `cutoff`.
pub fn subgraph_restriction(
    g: &Graph,
    f_labels: &[String],
    cutoff: usize,
    samples: usize,
    cfg: &ToleranceConfig,
) -> Result<SubgraphRestriction> {
    let fset = g.vertex_set(f_labels)?;
    let (h, vmap, emap) = g.induced(&fset);
    let corr_g = Correspondence::Graph(g.clone());
    let corr_h = Correspondence::Graph(h.clone());
    let fg = TruncatedFockSpace::new(corr_g.clone(), cutoff)?;
    let fh = TruncatedFockSpace::new(corr_h.clone(), cutoff)?;

    let mut isometry = ComplexMatrix::zeros(fg.dim(), fh.dim());
    for k in 0..=cutoff {
        let index: HashMap<(usize, &[usize]), usize> = fg
            .paths(k)
            .expect("graph backend")
            .iter()
            .enumerate()
            .map(|(i, (r, p))| ((*r, p.as_slice()), i))
            .collect();
        for (j, (r, p)) in fh.paths(k).expect("graph backend").iter().enumerate() {
            let lifted: Vec<usize> = p.iter().map(|&e| emap[e]).collect();
            let i = index
                .get(&(vmap[*r], lifted.as_slice()))
                .ok_or_else(|| Error::InvalidGraph("subgraph path missing from the ambient graph".into()))?;
            isometry[(fg.level_offset(k) + i, fh.level_offset(k) + j)] = C_ONE;
        }
    }

    let mut vertex_images = vec![None; g.vertex_count()];
    for (local, &v) in vmap.iter().enumerate() {
        vertex_images[v] = Some(local);
    }
    let mut edge_images = vec![None; g.edge_count()];
    for (local, &e) in emap.iter().enumerate() {
        edge_images[e] = Some(local);
    }

    let pi = |s: &ComplexMatrix| s.compress(&isometry);
    let mut generator_residual: f64 = 0.0;
    let mut leaving_edges_zero = true;
    for v in 0..g.vertex_count() {
        let mut vals = vec![C_ZERO; g.vertex_count()];
        vals[v] = C_ONE;
        let image = pi(&left_action(&fg, &AElement::from_scalars(&vals))?);
        let target = match vertex_images[v] {
            Some(local) => {
                let mut w = vec![C_ZERO; h.vertex_count()];
                w[local] = C_ONE;
                left_action(&fh, &AElement::from_scalars(&w))?
            }
            None => ComplexMatrix::zeros(fh.dim(), fh.dim()),
        };
        generator_residual = generator_residual.max(operator_norm(&(&image - &target)));
    }
    for (e, mapped) in edge_images.iter().enumerate() {
        let image = pi(&creation(&fg, &XElement::delta(g.edge_count(), e))?);
        match *mapped {
            Some(local) => {
                let target = creation(&fh, &XElement::delta(h.edge_count(), local))?;
                generator_residual = generator_residual.max(operator_norm(&(&image - &target)));
            }
            None => leaving_edges_zero &= image.is_zero(0.0),
        }
    }

    // Sampled elements of the subgraph algebra, realized in both representations.
    let mut rng = rng_for(cfg.rng_seed, 0x5_ab9a);
    let mut multiplicativity_residual: f64 = 0.0;
    let mut isometry_deficit: f64 = 0.0;
    let mut prev: Option<(ComplexMatrix, ComplexMatrix)> = None;
    let lift = |p: &TensorPoly| TensorPoly {
        a_table: p.a_table.iter().map(|a| lift_a(a, &vmap, g.vertex_count())).collect(),
        x_table: p.x_table.iter().map(|x| lift_x(x, &emap, g.edge_count())).collect(),
        terms: p.terms.clone(),
    };
    for _ in 0..samples {
        let p = random_tensor_poly(&corr_h, 2, 4, &mut rng);
        let sg = super::eval_tensor_poly(&fg, &lift(&p))?;
        let sh = super::eval_tensor_poly(&fh, &p)?;
        let image = pi(&sg);
        generator_residual = generator_residual.max(operator_norm(&(&image - &sh)) / (1.0 + operator_norm(&sh)));
        isometry_deficit = isometry_deficit.max(operator_norm(&sg) - operator_norm(&image));
        if let Some((pg, pimage)) = &prev {
            let prod = pi(&(&sg * pg));
            let scale = 1.0 + operator_norm(&sg) * operator_norm(pg);
            multiplicativity_residual =
                multiplicativity_residual.max(operator_norm(&(&prod - &(&image * pimage))) / scale);
        }
        prev = Some((sg, image));
    }
    Ok(SubgraphRestriction {
        subgraph: h,
        vertex_images,
        edge_images,
        isometry,
        generator_residual,
        leaving_edges_zero,
        multiplicativity_residual,
        isometry_deficit,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::poly::random_tensor_poly;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn trivial_compression() {
        let corr = Correspondence::Free(2);
        let f = TruncatedFockSpace::new(corr.clone(), 2).unwrap();
        let s = SquareArray::single(TensorPoly::rho(corr.coefficients().one()));
        let c = rfd_compression_tensor(&f, &s, &cfg()).unwrap();
        assert_eq!(c.report.dim_f, 1);
        assert!((c.report.norm_original - 1.0).abs() < 1e-12);
        assert!((c.report.norm_compressed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loop_shift_compresses_to_two_vectors() {
        let corr = Correspondence::Graph(Graph::bouquet(1));
        let f = TruncatedFockSpace::new(corr, 4).unwrap();
        let s = SquareArray::single(TensorPoly::t(XElement::delta(1, 0)));
        let c = rfd_compression_tensor(&f, &s, &cfg()).unwrap();
        assert!(c.report.dim_f <= 2);
        assert!(c.report.norm_gap().abs() < 1e-8);
        assert!(c.covariance_residual() < 1e-9);
    }

    #[test]
    fn free_two_by_two_polys() {
        let corr = Correspondence::Free(2);
        let f = TruncatedFockSpace::new(corr.clone(), 3).unwrap();
        let mut rng = rng_for(11, 0);
        let s = SquareArray::from_fn(2, |_, _| random_tensor_poly(&corr, 2, 3, &mut rng));
        let c = rfd_compression_tensor(&f, &s, &cfg()).unwrap();
        assert!(c.report.norm_gap().abs() < 1e-8, "{}", c.report.norm_gap());
        assert!(c.covariance_residual() < 1e-9, "{c:?}");
        assert!(c.report.dim_f <= f.dim());
    }

    #[test]
    fn two_vertex_graph_compression() {
        let g = Graph::parse("vertex u\nvertex v\nedge a u u\nedge b u v\nedge c v u\n").unwrap();
        let corr = Correspondence::Graph(g);
        let f = TruncatedFockSpace::new(corr.clone(), 4).unwrap();
        let mut rng = rng_for(5, 0);
        let s = SquareArray::single(random_tensor_poly(&corr, 2, 3, &mut rng));
        let c = rfd_compression_tensor(&f, &s, &cfg()).unwrap();
        assert!(c.report.norm_gap().abs() < 1e-8);
        assert!(c.covariance_residual() < 1e-9, "{c:?}");
    }

    #[test]
    fn full_vertex_set_is_identity() {
        let g = Graph::parse("vertex u\nvertex v\nedge a u v\nedge b v u\n").unwrap();
        let r = subgraph_restriction(&g, &labels(&["u", "v"]), 3, 5, &cfg()).unwrap();
        assert_eq!(r.isometry, ComplexMatrix::identity(r.isometry.rows()));
        assert!(r.isometry_deficit.abs() < 1e-14);
        assert!(r.generator_residual < 1e-14);
    }

    #[test]
    fn disjoint_loops() {
        let g = Graph::parse("vertex u\nvertex v\nedge a u u\nedge b v v\n").unwrap();
        let r = subgraph_restriction(&g, &labels(&["u"]), 4, 10, &cfg()).unwrap();
        assert_eq!(r.edge_images, vec![Some(0), None]);
        assert!(r.leaving_edges_zero);
        assert!(r.isometry_deficit <= 1e-9);
        assert!(r.multiplicativity_residual < 1e-12);
        assert!(r.generator_residual < 1e-12);
    }

    #[test]
    fn leaving_edge_maps_to_zero() {
        let g = Graph::parse("vertex u\nvertex v\nedge a u u\nedge b u v\nedge c v u\n").unwrap();
        let r = subgraph_restriction(&g, &labels(&["u"]), 4, 10, &cfg()).unwrap();
        assert_eq!(r.edge_images, vec![Some(0), None, None]);
        assert!(r.leaving_edges_zero);
        assert!(r.isometry_deficit <= 1e-9, "{}", r.isometry_deficit);
        assert!(r.multiplicativity_residual < 1e-12);
        assert!(matches!(
            subgraph_restriction(&g, &labels(&["w"]), 2, 1, &cfg()),
            Err(Error::BadVertexSet(_))
        ));
    }
}
