//! Compressed adjacency for BFS-style queries.

use std::collections::VecDeque;

use crate::edges::EdgeList;
use crate::lattice::BoxSpec;

/// Undirected adjacency in CSR form.
#[derive(Debug, Clone)]
pub struct Graph {
    region: BoxSpec,
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl Graph {
    pub fn from_edges(edges: &EdgeList) -> Self {
        let n = edges.region().len();
        let mut deg = vec![0u32; n + 1];
        for &(a, b) in edges.edges() {
            deg[a as usize + 1] += 1;
            deg[b as usize + 1] += 1;
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let mut fill = deg.clone();
        let mut targets = vec![0u32; deg[n] as usize];
        for &(a, b) in edges.edges() {
            targets[fill[a as usize] as usize] = b;
            fill[a as usize] += 1;
            targets[fill[b as usize] as usize] = a;
            fill[b as usize] += 1;
        }
        Graph { region: edges.region().clone(), offsets: deg, targets }
    }

    pub fn region(&self) -> &BoxSpec {
        &self.region
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn degree(&self, v: usize) -> usize {
        (self.offsets[v + 1] - self.offsets[v]) as usize
    }

    /// Hop counts from `source`; `u32::MAX` marks unreachable vertices.
    pub fn bfs_distances(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source as u32);
        while let Some(v) = queue.pop_front() {
            let next = dist[v as usize] + 1;
            for &w in self.neighbors(v as usize) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = next;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}
