//! Connected components: union-find labels, in-box components, dense
//! vertices and box attachment.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::edges::EdgeList;
use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::lattice::BoxSpec;

/// Disjoint-set forest with union by size and path compression. Each root
/// also tracks the smallest vertex of its set.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    min: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            min: (0..n as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] as usize != root {
            root = self.parent[root] as usize;
        }
        let mut cur = x;
        while self.parent[cur] as usize != root {
            let next = self.parent[cur] as usize;
            self.parent[cur] = root as u32;
            cur = next;
        }
        root
    }

    /// Merges the sets of `a` and `b`; returns false if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        self.min[ra] = self.min[ra].min(self.min[rb]);
        true
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }

    /// Smallest vertex in the set of `x`.
    pub fn set_min(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.min[r] as usize
    }

    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

/// Partition of a box's vertices into occupied-edge components.
///
/// Components are named by their smallest vertex index, so labels do not
/// depend on the order edges were merged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterLabels {
    region: BoxSpec,
    root: Vec<u32>,
    component_sizes: BTreeMap<u32, usize>,
}

impl ClusterLabels {
    pub fn region(&self) -> &BoxSpec {
        &self.region
    }

    /// Canonical root (smallest member) of the component of `v`.
    pub fn root(&self, v: usize) -> usize {
        self.root[v] as usize
    }

    pub fn roots(&self) -> &[u32] {
        &self.root
    }

    pub fn size_of(&self, v: usize) -> usize {
        self.component_sizes[&self.root[v]]
    }

    pub fn component_sizes(&self) -> &BTreeMap<u32, usize> {
        &self.component_sizes
    }

    pub fn component_count(&self) -> usize {
        self.component_sizes.len()
    }

    pub fn same_component(&self, a: usize, b: usize) -> bool {
        self.root[a] == self.root[b]
    }

    /// All members of the component rooted at `root`, ascending.
    pub fn members(&self, root: usize) -> Vec<usize> {
        self.root
            .iter()
            .enumerate()
            .filter(|(_, &r)| r as usize == root)
            .map(|(v, _)| v)
            .collect()
    }
}

/// Labels the components of the box under `edges`.
pub fn components(edges: &EdgeList) -> ClusterLabels {
    let region = edges.region().clone();
    let mut uf = UnionFind::new(region.len());
    for &(a, b) in edges.edges() {
        uf.union(a as usize, b as usize);
    }
    labels_from(region, &mut uf)
}

/// Like [`components`] but for an unvalidated list of pairs; endpoints
/// outside the box are rejected.
pub fn components_of_pairs(region: &BoxSpec, pairs: &[(usize, usize)]) -> Result<ClusterLabels> {
    let n = region.len();
    let mut uf = UnionFind::new(n);
    for &(a, b) in pairs {
        if a >= n || b >= n {
            return Err(Error::OutOfBox(vec![a.max(b) as i64]));
        }
        uf.union(a, b);
    }
    Ok(labels_from(region.clone(), &mut uf))
}

pub(crate) fn labels_from(region: BoxSpec, uf: &mut UnionFind) -> ClusterLabels {
    let n = uf.len();
    let mut root = Vec::with_capacity(n);
    let mut component_sizes = BTreeMap::new();
    for v in 0..n {
        let r = uf.set_min(v) as u32;
        root.push(r);
        *component_sizes.entry(r).or_insert(0) += 1;
    }
    ClusterLabels { region, root, component_sizes }
}

/// Largest component; ties go to the component with the smaller root.
pub fn largest_component(labels: &ClusterLabels) -> (Vec<usize>, usize) {
    let (root, size) = largest_root(labels);
    (labels.members(root), size)
}

/// Root and size of the largest component (same tie rule).
pub fn largest_root(labels: &ClusterLabels) -> (usize, usize) {
    let mut best = (0usize, 0usize);
    for (&r, &s) in labels.component_sizes() {
        // BTreeMap iterates roots in increasing order; strict > keeps the first
        if s > best.1 {
            best = (r as usize, s);
        }
    }
    best
}

/// Vertices of `Lambda_ell(x)` connected to `x` by occupied edges with both
/// endpoints in `Lambda_ell(x)`, ascending.
pub fn component_within(x: &[i64], ell: usize, graph: &Graph) -> Result<Vec<usize>> {
    let window = BoxSpec::centered(x.to_vec(), ell)?;
    if !graph.region().contains_box(&window) {
        return Err(Error::RegionTooSmall(format!(
            "Lambda_{ell}({x:?}) is not inside the sampled region"
        )));
    }
    let mut bfs = RestrictedBfs::new(graph.vertex_count());
    let start = graph.region().require_index(x)?;
    Ok(bfs.run(graph, start, &window))
}

/// BFS confined to a sub-box, reusing its marker array across calls.
pub(crate) struct RestrictedBfs {
    stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<u32>,
    coord: Vec<i64>,
}

impl RestrictedBfs {
    pub(crate) fn new(n: usize) -> Self {
        RestrictedBfs { stamp: vec![0; n], epoch: 0, queue: Vec::new(), coord: Vec::new() }
    }

    pub(crate) fn run(&mut self, graph: &Graph, start: usize, window: &BoxSpec) -> Vec<usize> {
        self.epoch += 1;
        let region = graph.region();
        self.coord.resize(region.d(), 0);
        self.queue.clear();
        self.queue.push(start as u32);
        self.stamp[start] = self.epoch;
        let mut head = 0;
        while head < self.queue.len() {
            let v = self.queue[head] as usize;
            head += 1;
            for &w in graph.neighbors(v) {
                let w = w as usize;
                if self.stamp[w] == self.epoch {
                    continue;
                }
                region.write_coord(w, &mut self.coord);
                if window.contains(&self.coord) {
                    self.stamp[w] = self.epoch;
                    self.queue.push(w as u32);
                }
            }
        }
        let mut out: Vec<usize> = self.queue.iter().map(|&v| v as usize).collect();
        out.sort_unstable();
        out
    }
}

/// The `(rho, ell)`-dense vertices of `Lambda_n(0)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseSetReport {
    pub n: usize,
    pub ell: usize,
    pub rho: f64,
    /// Coordinates of the dense vertices in lexicographic order.
    pub dense_vertices: Vec<Vec<i64>>,
    /// `|D| / |Lambda_n(0)|`.
    pub fraction: f64,
}

/// Collects the vertices `x` of `Lambda_n(0)` whose in-box component within
/// `Lambda_ell(x)` covers at least `rho (2 ell + 1)^d` vertices.
pub fn dense_vertices(n: usize, ell: usize, rho: f64, graph: &Graph) -> Result<DenseSetReport> {
    if ell >= n {
        return Err(invalid(format!("need ell < n, got ell = {ell}, n = {n}")));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(invalid(format!("rho must lie in (0, 1], got {rho}")));
    }
    let region = graph.region();
    let d = region.d();
    let needed = BoxSpec::centered(vec![0; d], n + ell)?;
    if !region.contains_box(&needed) {
        return Err(Error::RegionTooSmall(format!(
            "dense vertices of Lambda_{n}(0) at scale {ell} need Lambda_{}(0) to be sampled",
            n + ell
        )));
    }
    let outer = BoxSpec::centered(vec![0; d], n)?;
    let threshold = rho * ((2 * ell + 1) as f64).powi(d as i32);
    let mut bfs = RestrictedBfs::new(graph.vertex_count());
    let mut dense = Vec::new();
    for x in outer.iter() {
        let window = BoxSpec::centered(x.clone(), ell)?;
        let start = region.require_index(&x)?;
        let size = bfs.run(graph, start, &window).len();
        if size as f64 >= threshold {
            dense.push(x);
        }
    }
    let fraction = dense.len() as f64 / outer.len() as f64;
    Ok(DenseSetReport { n, ell, rho, dense_vertices: dense, fraction })
}

/// True iff some occupied edge joins a vertex of `comp_x` to one of `comp_y`.
pub fn boxes_attached(comp_x: &[usize], comp_y: &[usize], edges: &EdgeList) -> Result<bool> {
    let n = edges.region().len();
    let mut side = vec![0u8; n];
    for &v in comp_x {
        if v >= n {
            return Err(Error::OutOfBox(vec![v as i64]));
        }
        side[v] = 1;
    }
    for &v in comp_y {
        if v >= n {
            return Err(Error::OutOfBox(vec![v as i64]));
        }
        if side[v] == 1 {
            return Err(invalid(format!("vertex {v} belongs to both sets")));
        }
        side[v] = 2;
    }
    Ok(edges.edges().iter().any(|&(a, b)| {
        let (sa, sb) = (side[a as usize], side[b as usize]);
        (sa == 1 && sb == 2) || (sa == 2 && sb == 1)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, pairs: &[(usize, usize)]) -> EdgeList {
        EdgeList::new(BoxSpec::at_origin(1, n).unwrap(), pairs.to_vec(), 1.0).unwrap()
    }

    #[test]
    fn isolated_and_path() {
        let l = components(&line(4, &[]));
        assert_eq!(l.component_count(), 4);
        assert_eq!(largest_component(&l), (vec![0], 1));
        let p = components(&line(3, &[(0, 1), (1, 2)]));
        assert_eq!(p.component_count(), 1);
        assert_eq!(p.size_of(2), 3);
        assert_eq!(p.root(2), 0);
    }

    #[test]
    fn largest_and_ties() {
        let one = components(&line(6, &[(3, 5)]));
        assert_eq!(largest_component(&one), (vec![3, 5], 2));
        let tie = components(&line(7, &[(4, 5), (5, 6), (1, 2), (2, 3)]));
        assert_eq!(largest_component(&tie), (vec![1, 2, 3], 3));
    }

    #[test]
    fn sizes_sum_to_vertex_count() {
        let l = components(&line(10, &[(0, 9), (2, 3), (3, 4), (9, 5)]));
        assert_eq!(l.component_sizes().values().sum::<usize>(), 10);
        assert!(l.same_component(0, 5));
        assert!(!l.same_component(0, 2));
    }

    #[test]
    fn out_of_box_pairs_rejected() {
        let b = BoxSpec::at_origin(1, 3).unwrap();
        assert!(components_of_pairs(&b, &[(0, 3)]).is_err());
    }

    #[test]
    fn component_within_examples() {
        let b = BoxSpec::centered(vec![0], 5).unwrap();
        let idx = |c: i64| b.index_of(&[c]).unwrap();
        let g = Graph::from_edges(&EdgeList::empty(b.clone()));
        assert_eq!(component_within(&[0], 2, &g).unwrap(), vec![idx(0)]);
        // 0 -- 4 leaves Lambda_2(0); 4 -- 1 would bring 1 back only through 4
        let e = EdgeList::new(b.clone(), vec![(idx(0), idx(4)), (idx(4), idx(1)), (idx(0), idx(-1))], 1.0).unwrap();
        let g = Graph::from_edges(&e);
        assert_eq!(component_within(&[0], 2, &g).unwrap(), vec![idx(-1), idx(0)]);
        assert_eq!(component_within(&[0], 4, &g).unwrap(), vec![idx(-1), idx(0), idx(1), idx(4)]);
        assert!(component_within(&[0], 6, &g).is_err());
        assert!(component_within(&[4], 2, &g).is_err());
    }

    #[test]
    fn dense_examples() {
        let b = BoxSpec::centered(vec![0, 0], 4).unwrap();
        let g = Graph::from_edges(&EdgeList::empty(b.clone()));
        let all = dense_vertices(2, 1, 1e-9, &g).unwrap();
        assert_eq!(all.fraction, 1.0);
        assert_eq!(all.dense_vertices.len(), 25);
        let none = dense_vertices(2, 1, 0.5, &g).unwrap();
        assert!(none.dense_vertices.is_empty());
        let n = b.len();
        let complete: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let g = Graph::from_edges(&EdgeList::new(b, complete, 1.0).unwrap());
        assert_eq!(dense_vertices(2, 1, 1.0, &g).unwrap().fraction, 1.0);
        assert!(dense_vertices(3, 2, 0.5, &g).is_err());
        assert!(dense_vertices(2, 2, 0.5, &g).is_err());
        assert!(dense_vertices(2, 1, 0.0, &g).is_err());
    }

    #[test]
    fn attachment() {
        let e = line(6, &[(0, 1), (2, 3), (1, 4)]);
        assert!(!boxes_attached(&[0, 1], &[2, 3], &e).unwrap());
        assert!(boxes_attached(&[0, 1], &[4, 5], &e).unwrap());
        assert!(boxes_attached(&[0, 1], &[1], &e).is_err());
    }
}
