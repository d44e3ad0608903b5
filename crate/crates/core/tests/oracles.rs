mod common;

use common::{
    after, nmi_direct, random_action, random_graph, random_partition, random_structure, relabel,
    Dense,
};
use dgt_core::metrics::{modularity_directed, modularity_undirected, nmi};
use dgt_core::{Action, GainContext, GainKind, Partition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

#[test]
fn directed_modularity_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let n = rng.gen_range(2..=25);
        let p = rng.gen_range(0.05..0.5);
        let seq = random_graph(&mut rng, n, p);
        let g = seq.snapshot(0);
        let k = rng.gen_range(1..6);
        let p = random_partition(&mut rng, g.nodes(), k);
        let dense = Dense::new(g);
        let got = modularity_directed(g, &p).unwrap();
        assert!((got - dense.modularity_directed(&p)).abs() < TOL);
        let sym = g.symmetrized();
        let und = modularity_undirected(g, &p).unwrap();
        assert!((und - Dense::new(&sym).modularity_undirected(&p)).abs() < TOL);
    }
}

#[test]
fn nmi_matches_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let n = rng.gen_range(1..=30);
        let seq = random_graph(&mut rng, n.max(2), 0.2);
        let nodes = seq.snapshot(0).nodes();
        let (kx, ky) = (rng.gen_range(1..6), rng.gen_range(1..6));
        let x = random_partition(&mut rng, nodes, kx);
        let y = random_partition(&mut rng, nodes, ky);
        assert!((nmi(&x, &y).unwrap() - nmi_direct(&x, &y)).abs() < TOL);
        assert!((nmi(&x, &x).unwrap() - 1.0).abs() < TOL);
        let xr = relabel(&mut rng, &x);
        assert!((nmi(&xr, &y).unwrap() - nmi(&x, &y).unwrap()).abs() < TOL);
    }
}

#[test]
fn utility_matches_literal_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..60 {
        let n = rng.gen_range(2..=15);
        let seq = random_graph(&mut rng, n, 0.3);
        let g = seq.snapshot(0);
        let s = random_structure(&mut rng, g, 4, 3);
        let ctx = GainContext::new(g).unwrap();
        let dense = Dense::new(g);
        for &v in g.nodes() {
            let sim = ctx.gain_similarity(v, s.labels(v), &s).unwrap();
            assert!((sim - dense.gain_similarity(&s, v)).abs() < TOL);
            let modu = ctx.gain_modularity(v, s.labels(v), &s).unwrap();
            assert!((modu - dense.gain_modularity(&s, v)).abs() < TOL);
            for &w in g.nodes() {
                if w != v {
                    assert!((ctx.similarity(v, w).unwrap() - dense.similarity(v, w)).abs() < TOL);
                }
            }
        }
    }
}

#[test]
fn delta_matches_recompute() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (kind, modular) in [(GainKind::Similarity, false), (GainKind::Modularity, true)] {
        for _ in 0..200 {
            let n = rng.gen_range(2..=20);
            let seq = random_graph(&mut rng, n, 0.25);
            let g = seq.snapshot(0);
            let s = random_structure(&mut rng, g, 5, 3);
            let agent = g.nodes()[rng.gen_range(0..g.n())];
            let action = random_action(&mut rng, &s, agent);
            let ctx = GainContext::new(g).unwrap();
            let dense = Dense::new(g);
            let got = ctx.utility_delta(kind, agent, action, &s).unwrap();
            let next = after(&s, agent, action);
            let want = dense.utility(&next, agent, modular) - dense.utility(&s, agent, modular);
            assert!((got - want).abs() < TOL, "{action:?}: {got} vs {want}");
        }
    }
}

#[test]
fn worked_similarity_examples() {
    use dgt_core::graph::load_edge_stream;
    use dgt_core::EdgeRecord;
    let seq = load_edge_stream(
        [("a", "c"), ("b", "c"), ("a", "b")].map(|(u, v)| EdgeRecord::new(u, v, 0)),
    )
    .unwrap();
    let ctx = GainContext::new(seq.snapshot(0)).unwrap();
    let id = |l| seq.node_id(l).unwrap();
    assert_eq!(ctx.similarity(id("a"), id("b")).unwrap(), 1.0);
    assert!(ctx.similarity(id("a"), id("a")).is_err());
}

#[test]
fn two_three_cycles_have_half_modularity() {
    use dgt_core::graph::load_edge_stream;
    use dgt_core::EdgeRecord;
    let edges = [
        ("a", "b"),
        ("b", "c"),
        ("c", "a"),
        ("d", "e"),
        ("e", "f"),
        ("f", "d"),
    ];
    let seq = load_edge_stream(edges.map(|(u, v)| EdgeRecord::new(u, v, 0))).unwrap();
    let g = seq.snapshot(0);
    let p: Partition = g
        .nodes()
        .iter()
        .map(|&v| (v, u64::from("def".contains(seq.label(v)))))
        .collect();
    assert!((modularity_directed(g, &p).unwrap() - 0.5).abs() < TOL);
    assert!((Dense::new(g).modularity_directed(&p) - 0.5).abs() < TOL);
}

#[test]
fn noop_delta_is_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let seq = random_graph(&mut rng, 8, 0.4);
    let g = seq.snapshot(0);
    let s = random_structure(&mut rng, g, 3, 2);
    let ctx = GainContext::new(g).unwrap();
    assert_eq!(
        ctx.utility_delta(GainKind::Similarity, g.nodes()[0], Action::NoOp, &s)
            .unwrap(),
        0.0
    );
}
