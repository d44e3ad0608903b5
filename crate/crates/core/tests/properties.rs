mod common;

use std::collections::BTreeSet;

use common::{random_graph, random_partition, random_structure, relabel};
use dgt_core::game::{best_response_with_delta, is_local_equilibrium, potential, run_snapshot};
use dgt_core::graph::diff;
use dgt_core::metrics::{modularity_directed, modularity_undirected, nmi};
use dgt_core::{CommunityStructure, GainContext, GainKind, GameConfig, SnapshotSequence};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph(seed: u64, n: usize, p: f64) -> SnapshotSequence {
    random_graph(&mut ChaCha8Rng::seed_from_u64(seed), n, p)
}

/// Same graph with every edge mirrored.
fn bidirected(seed: u64, n: usize, p: f64) -> SnapshotSequence {
    use dgt_core::graph::SequenceBuilder;
    let base = graph(seed, n, p);
    let mut b = SequenceBuilder::new().undirected(true);
    for (u, v) in base.snapshot(0).edges() {
        b.add_edge(base.label(u), base.label(v), 0).unwrap();
    }
    b.build().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn common_neighbors_symmetric(seed in any::<u64>(), n in 2usize..20) {
        let seq = graph(seed, n, 0.3);
        let g = seq.snapshot(0);
        for &i in g.nodes() {
            for &j in g.nodes() {
                if i != j {
                    prop_assert_eq!(g.common_neighbors(i, j).unwrap(), g.common_neighbors(j, i).unwrap());
                }
            }
        }
    }

    #[test]
    fn self_diff_is_empty(seed in any::<u64>(), n in 2usize..20) {
        let seq = graph(seed, n, 0.3);
        let stats = diff(seq.snapshot(0), seq.snapshot(0));
        prop_assert_eq!((stats.edges_added, stats.edges_deleted, stats.nodes_changed), (0, 0, 0));
    }

    #[test]
    fn degree_sums_equal_m(seed in any::<u64>(), n in 2usize..25) {
        let seq = graph(seed, n, 0.3);
        let g = seq.snapshot(0);
        let din: usize = g.nodes().iter().map(|&v| g.in_degree(v)).sum();
        let dout: usize = g.nodes().iter().map(|&v| g.out_degree(v)).sum();
        prop_assert_eq!(din, g.m());
        prop_assert_eq!(dout, g.m());
    }

    #[test]
    fn similarity_additive_over_labels(seed in any::<u64>(), n in 2usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq = random_graph(&mut rng, n, 0.3);
        let g = seq.snapshot(0);
        let s = random_structure(&mut rng, g, 4, 4);
        let ctx = GainContext::new(g).unwrap();
        for &v in g.nodes() {
            let labels: Vec<_> = s.labels(v).iter().copied().collect();
            let (left, right) = labels.split_at(labels.len() / 2);
            let left: BTreeSet<_> = left.iter().copied().collect();
            let right: BTreeSet<_> = right.iter().copied().collect();
            let whole = ctx.gain_similarity(v, s.labels(v), &s).unwrap();
            let parts = ctx.gain_similarity(v, &left, &s).unwrap() + ctx.gain_similarity(v, &right, &s).unwrap();
            prop_assert!((whole - parts).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_strictly_increasing(seed in any::<u64>(), labels in 0usize..50) {
        let seq = graph(seed, 6, 0.4);
        let ctx = GainContext::new(seq.snapshot(0)).unwrap();
        prop_assert!(ctx.loss(labels + 1) > ctx.loss(labels));
    }

    #[test]
    fn runs_keep_structure_consistent(seed in any::<u64>(), n in 2usize..20, gain in prop::bool::ANY) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq = random_graph(&mut rng, n, 0.25);
        let g = seq.snapshot(0);
        let init = random_structure(&mut rng, g, 4, 2);
        let cfg = GameConfig {
            gain: if gain { GainKind::Modularity } else { GainKind::Similarity },
            rng_seed: seed,
            ..GameConfig::default()
        };
        let (evolved, result) = run_snapshot(g, init, &cfg).unwrap();
        prop_assert!(evolved.audit().is_empty());
        prop_assert_eq!(result.partition.len(), g.n());
        prop_assert!(result.games_played <= cfg.max_passes * g.n());
    }

    #[test]
    fn nmi_symmetric_and_relabel_invariant(seed in any::<u64>(), n in 2usize..30, kx in 1u64..6, ky in 1u64..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq = random_graph(&mut rng, n, 0.2);
        let nodes = seq.snapshot(0).nodes();
        let x = random_partition(&mut rng, nodes, kx);
        let y = random_partition(&mut rng, nodes, ky);
        let v = nmi(&x, &y).unwrap();
        prop_assert!((v - nmi(&y, &x).unwrap()).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
        prop_assert!((nmi(&relabel(&mut rng, &x), &relabel(&mut rng, &y)).unwrap() - v).abs() < 1e-12);
    }

    #[test]
    fn symmetrized_directed_equals_undirected(seed in any::<u64>(), n in 2usize..25, k in 1u64..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq = random_graph(&mut rng, n, 0.2);
        let g = seq.snapshot(0);
        let p = random_partition(&mut rng, g.nodes(), k);
        let sym = g.symmetrized();
        let directed = modularity_directed(&sym, &p).unwrap();
        prop_assert!((directed - modularity_undirected(g, &p).unwrap()).abs() < 1e-12);
        let relabeled = relabel(&mut rng, &p);
        prop_assert!((modularity_directed(g, &relabeled).unwrap() - modularity_directed(g, &p).unwrap()).abs() < 1e-12);
    }

    /// On mirrored graphs the similarity kernel is symmetric, so every accepted
    /// action lowers `L - G/2` by exactly the mover's utility gain.
    #[test]
    fn half_gain_potential_tracks_moves(seed in any::<u64>(), n in 3usize..16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq = bidirected(seed, n, 0.3);
        let g = seq.snapshot(0);
        let ctx = GainContext::new(g).unwrap();
        let mut s = random_structure(&mut rng, g, 3, 2);
        let cfg = GameConfig::default();
        for _ in 0..3 {
            for &v in g.nodes() {
                let (action, delta) = best_response_with_delta(&ctx, v, &s, &cfg).unwrap();
                let before = potential(&ctx, &s, GainKind::Similarity, 0.5, 1.0).unwrap();
                s.apply(v, action).unwrap();
                let now = potential(&ctx, &s, GainKind::Similarity, 0.5, 1.0).unwrap();
                prop_assert!((before - now - delta).abs() < 1e-9, "{} vs {}", before - now, delta);
            }
        }
    }
}

#[test]
fn zero_change_pass_is_equilibrium() {
    for seed in 0..30 {
        let seq = graph(seed, 18, 0.2);
        let g = seq.snapshot(0);
        let cfg = GameConfig {
            max_passes: 500,
            change_fraction_threshold: 0.0,
            rng_seed: seed,
            ..GameConfig::default()
        };
        let (evolved, result) =
            run_snapshot(g, CommunityStructure::singletons(g, 0), &cfg).unwrap();
        assert!(result.reached_fixed_point, "seed {seed} did not settle");
        let ctx = GainContext::new(g).unwrap();
        assert!(is_local_equilibrium(&ctx, &evolved, &cfg).unwrap());
    }
}
