use opalg_core::envelope::{
    corner_subspace, quotient_subspace, roots_of_unity_subspace, shilov_ideal_search, shilov_search_in,
    EnvelopeContext, UnitalSubspace,
};
use opalg_core::fock::{creation, left_action, Graph, XElement};
use opalg_core::opalg::{adjoint_intersection, generate_algebra};
use opalg_core::{ComplexMatrix, Correspondence, ToleranceConfig, TruncatedFockSpace};

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

#[test]
fn tensor_algebra_diagonal_is_coefficient_algebra() {
    let c = cfg();
    for text in [
        "vertex u\nedge a u u\n",
        "vertex u\nvertex v\nedge a u v\nedge b v u\n",
        "vertex u\nvertex v\nvertex w\nedge a u v\nedge b u w\n",
    ] {
        let g = Graph::parse(text).unwrap();
        let corr = Correspondence::Graph(g.clone());
        let f = TruncatedFockSpace::new(corr.clone(), 3).unwrap();
        let mut gens = Vec::new();
        for a in corr.coefficients().matrix_units() {
            gens.push(left_action(&f, &a).unwrap());
        }
        for e in 0..g.edge_count() {
            gens.push(creation(&f, &XElement::delta(g.edge_count(), e)).unwrap());
        }
        let alg = generate_algebra(&gens, true, &c).unwrap();
        assert_eq!(adjoint_intersection(&alg, &c).len(), g.vertex_count(), "{text}");
    }
}

#[test]
fn shilov_deletion_is_unique_maximal_for_small_decompositions() {
    let c = cfg();
    let cases: Vec<UnitalSubspace> = vec![
        roots_of_unity_subspace(2, &c).unwrap(),
        roots_of_unity_subspace(3, &c).unwrap(),
        roots_of_unity_subspace(4, &c).unwrap(),
        corner_subspace(&c).unwrap(),
    ];
    for s in cases {
        let r = shilov_ideal_search(&s, &c).unwrap();
        assert!(r.exhaustive && r.maximal);
        assert_eq!(r.unique_maximal, Some(true));
        assert!(!r.flagged);
    }
}

#[test]
fn envelope_is_idempotent() {
    let c = cfg();
    // {a ⊕ a₁₁ ⊕ 0} + ℂI in M₄: C*(S) = M₂ ⊕ ℂ ⊕ ℂ, and only the a₁₁ point is deletable.
    let mut gens = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            let mut b = ComplexMatrix::unit(4, i, j);
            if i == 0 && j == 0 {
                b[(2, 2)] = opalg_core::linalg::C_ONE;
            }
            gens.push(b);
        }
    }
    let s = UnitalSubspace::new(4, &gens, &c).unwrap();
    let mut ctx = EnvelopeContext::new(&s, &c).unwrap();
    let r = shilov_search_in(&mut ctx).unwrap();
    assert_eq!(r.block_dims, vec![2, 1, 1]);
    assert_eq!(r.deletable, vec![1]);
    assert_eq!(r.envelope_dims, vec![2, 1]);
    let retained: Vec<usize> = (0..r.block_dims.len()).filter(|i| !r.deletable.contains(i)).collect();
    let q = quotient_subspace(&ctx, &retained, &c).unwrap();
    assert!(shilov_ideal_search(&q, &c).unwrap().deletable.is_empty());
}
