use lrperc::edges::{sample_graph, EdgeList, SamplingMode};
use lrperc::graph::Graph;
use lrperc::lattice::BoxSpec;
use lrperc::metrics::{graph_distance, Distance};
use lrperc::params::ModelParams;
use lrperc::rng::{replicate_seeds, Stream, Tag};
use lrperc::weights::sample_weights;

const INF: u32 = u32::MAX / 4;

fn floyd_warshall(n: usize, edges: &EdgeList) -> Vec<Vec<u32>> {
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(a, b) in edges.edges() {
        d[a as usize][b as usize] = 1;
        d[b as usize][a as usize] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

fn hops(x: Distance) -> u32 {
    match x {
        Distance::Hops(h) => h,
        Distance::Unreachable => INF,
    }
}

fn instance(trial: u64) -> EdgeList {
    let s = Stream::new(trial, Tag::Probe);
    let (region, d) = if trial % 2 == 0 {
        (BoxSpec::at_origin(1, 30).unwrap(), 1)
    } else {
        (BoxSpec::corner(vec![-2, 0], 5).unwrap(), 2)
    };
    let alpha = d as f64 * (1.1 + 2.0 * s.uniform(0));
    let beta = 0.6 + 2.0 * s.uniform(1);
    let lambda = 0.05 + 1.5 * s.uniform(2);
    let params = ModelParams::new(d, alpha, beta, lambda).unwrap();
    let (ws, es) = replicate_seeds(trial, 0);
    let w = sample_weights(&region, beta, ws).unwrap();
    sample_graph(&w, &params, SamplingMode::Exact, es).unwrap().edges
}

#[test]
fn bfs_matches_all_pairs_oracle() {
    for trial in 0..200 {
        let edges = instance(trial);
        let n = edges.region().len();
        let fw = floyd_warshall(n, &edges);
        let g = Graph::from_edges(&edges);
        for x in 0..n {
            for y in 0..n {
                assert_eq!(hops(graph_distance(&g, x, y)), fw[x][y], "trial {trial} pair ({x}, {y})");
            }
        }
    }
}

#[test]
fn metric_properties() {
    for trial in 0..40 {
        let edges = instance(1000 + trial);
        let g = Graph::from_edges(&edges);
        let n = g.vertex_count();
        let all: Vec<Vec<u32>> = (0..n).map(|x| g.bfs_distances(x)).collect();
        for x in 0..n {
            assert_eq!(all[x][x], 0);
            for y in 0..n {
                assert_eq!(all[x][y], all[y][x]);
                for z in 0..n {
                    let (a, b, c) = (all[x][z] as u64, all[x][y] as u64, all[y][z] as u64);
                    assert!(a <= b + c, "triangle inequality at ({x}, {y}, {z})");
                }
            }
        }
    }
}

#[test]
fn single_edge_is_one_hop() {
    let region = BoxSpec::at_origin(2, 4).unwrap();
    let e = EdgeList::new(region, vec![(0, 15)], 1.0).unwrap();
    let g = Graph::from_edges(&e);
    assert_eq!(graph_distance(&g, 0, 15), Distance::Hops(1));
    assert_eq!(graph_distance(&g, 15, 0), Distance::Hops(1));
    assert_eq!(graph_distance(&g, 0, 1), Distance::Unreachable);
}
