use lrperc::cluster::components_of_pairs;
use lrperc::edges::{sample_graph, EdgeList, SamplingMode};
use lrperc::graph::Graph;
use lrperc::lattice::BoxSpec;
use lrperc::metrics::{theta_curve, ThetaProxy};
use lrperc::params::ModelParams;
use lrperc::weights::sample_weights;
use proptest::prelude::*;

fn pairs(n: usize, max: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0..n, 0..n), 0..max)
        .prop_map(|v| v.into_iter().filter(|(a, b)| a != b).map(|(a, b)| (a.min(b), a.max(b))).collect())
}

fn dedup(mut v: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    v.sort_unstable();
    v.dedup();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn labels_agree_with_search(edges in pairs(36, 50)) {
        let region = BoxSpec::at_origin(2, 6).unwrap();
        let labels = components_of_pairs(&region, &edges).unwrap();
        let graph = Graph::from_edges(&EdgeList::new(region.clone(), dedup(edges), 1.0).unwrap());
        for v in 0..36 {
            let reach: Vec<usize> =
                graph.bfs_distances(v).iter().enumerate().filter(|(_, &d)| d != u32::MAX).map(|(u, _)| u).collect();
            prop_assert_eq!(labels.root(v), reach[0]);
            prop_assert_eq!(labels.size_of(v), reach.len());
        }
        prop_assert_eq!(labels.component_sizes().values().sum::<usize>(), 36);
    }

    #[test]
    fn labels_ignore_edge_order(edges in pairs(40, 60), shift in 0usize..60) {
        let region = BoxSpec::at_origin(1, 40).unwrap();
        let mut rotated = edges.clone();
        rotated.reverse();
        let len = rotated.len().max(1);
        rotated.rotate_left(shift % len);
        prop_assert_eq!(
            components_of_pairs(&region, &edges).unwrap(),
            components_of_pairs(&region, &rotated).unwrap()
        );
    }

    #[test]
    fn exact_samples_grow_with_lambda(
        seed in any::<u64>(),
        alpha in 1.2f64..4.0,
        beta in 0.8f64..3.0,
        lo in 0.0f64..2.0,
        gap in 0.0f64..2.0,
    ) {
        let region = BoxSpec::at_origin(1, 60).unwrap();
        let w = sample_weights(&region, beta, seed).unwrap();
        let small = ModelParams::new(1, alpha, beta, lo).unwrap();
        let large = ModelParams::new(1, alpha, beta, lo + gap).unwrap();
        let a = sample_graph(&w, &small, SamplingMode::Exact, seed ^ 1).unwrap().edges;
        let b = sample_graph(&w, &large, SamplingMode::Exact, seed ^ 1).unwrap().edges;
        prop_assert!(a.is_subset_of(&b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn boundary_reach_curve_is_monotone(
        seed in any::<u64>(),
        alpha in 1.1f64..1.9,
        beta in 1.2f64..3.0,
        mut grid in prop::collection::vec(0.0f64..1.0, 2..8),
    ) {
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let params = ModelParams::new(1, alpha, beta, 1.0).unwrap();
        let curve = theta_curve(&params, &grid, 24, 30, seed).unwrap();
        prop_assert!(curve.iter().all(|c| c.proxy == ThetaProxy::BoundaryReach));
        for w in curve.windows(2) {
            prop_assert!(w[0].estimate <= w[1].estimate);
        }
    }
}
