//! Geodesic distance estimates: Dijkstra over edge lengths.
//!
//! Graph distance overestimates the true geodesic distance by a
//! direction-dependent factor bounded by 2/sqrt(3) on near-equilateral
//! meshes. The smoothed variant averages each vertex with its one-ring to
//! damp that anisotropy for logarithmic fits; the source stays pinned at 0.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::mesh::TriangleMesh;

#[derive(PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, tie-broken by vertex index for determinism
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra distances from `source` over the edge graph.
pub fn radii(mesh: &TriangleMesh, source: usize) -> Vec<f64> {
    assert!(source < mesh.vertex_count(), "source out of range");
    let nbrs = mesh.vertex_neighbors();
    let mut dist = vec![f64::INFINITY; mesh.vertex_count()];
    let mut done = vec![false; mesh.vertex_count()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(HeapItem {
        dist: 0.0,
        vertex: source,
    });
    while let Some(HeapItem { dist: d, vertex: v }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &w in &nbrs[v] {
            let cand = d + mesh.edge_length(v, w);
            if cand < dist[w] {
                dist[w] = cand;
                heap.push(HeapItem {
                    dist: cand,
                    vertex: w,
                });
            }
        }
    }
    dist
}

/// Dijkstra distances with `passes` rounds of one-ring averaging
/// (2:1 self weighting). The source distance stays exactly 0.
pub fn smoothed_radii(mesh: &TriangleMesh, source: usize, passes: usize) -> Vec<f64> {
    let mut r = radii(mesh, source);
    let nbrs = mesh.vertex_neighbors();
    for _ in 0..passes {
        let mut next = r.clone();
        for v in 0..r.len() {
            if v == source {
                continue;
            }
            let mut acc = 2.0 * r[v];
            for &w in &nbrs[v] {
                acc += r[w];
            }
            next[v] = acc / (2.0 + nbrs[v].len() as f64);
        }
        r = next;
    }
    r
}
