//! Shortest-path completion of partial distance assignments and exhaustive
//! triangle-inequality audits.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::graph::Graph;
use crate::pairs::PairTable;

/// A triple violating one triangle orientation by more than the tolerance:
/// `d(long) > d(a) + d(b) + tol` where `long` splits the triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleViolation {
    pub triple: (u32, u32, u32),
    pub long_pair: (u32, u32),
    pub amount: f64,
}

struct HeapEntry {
    dist: f64,
    node: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.dist == other.dist && self.node == other.node
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance via reversal, ties by node id.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Nonnegative single-source shortest paths under per-edge weights taken
/// from `distances` at edge pairs; entries beyond `source` are returned.
fn shortest_from(graph: &Graph, distances: &PairTable, source: u32) -> Vec<f64> {
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source as usize] = 0.0;
    heap.push(HeapEntry { dist: 0.0, node: source });
    while let Some(HeapEntry { dist: d, node }) = heap.pop() {
        if done[node as usize] {
            continue;
        }
        done[node as usize] = true;
        for &next in graph.neighbors(node) {
            let weight = distances.get(node, next);
            let cand = d + weight;
            if cand < dist[next as usize] {
                dist[next as usize] = cand;
                heap.push(HeapEntry { dist: cand, node: next });
            }
        }
    }
    dist
}

fn completion_row(graph: &Graph, distances: &PairTable, source: u32) -> Vec<f64> {
    let n = graph.node_count() as u32;
    let dist = shortest_from(graph, distances, source);
    (source + 1..n).map(|j| dist[j as usize].min(1.0)).collect()
}

fn assemble(node_count: usize, rows: Vec<Vec<f64>>) -> PairTable {
    let mut table = PairTable::filled(node_count, 1.0);
    for (i, row) in rows.into_iter().enumerate() {
        for (offset, value) in row.into_iter().enumerate() {
            table.set(i as u32, (i + 1 + offset) as u32, value);
        }
    }
    table
}

/// Completes edge-supported distances to the full pseudo-metric
/// `d*_ij = min(shortest-path distance, 1)`; unreachable pairs get 1.
///
/// The result satisfies every triangle inequality by construction, and for
/// feasible inputs dominates them (`d* >= d`, with equality on edges).
pub fn metric_completion(graph: &Graph, distances: &PairTable) -> PairTable {
    assert_eq!(graph.node_count(), distances.node_count());
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let rows: Vec<Vec<f64>> = (0..graph.node_count() as u32)
            .into_par_iter()
            .map(|i| completion_row(graph, distances, i))
            .collect();
        assemble(graph.node_count(), rows)
    }
    #[cfg(not(feature = "parallel"))]
    {
        metric_completion_seq(graph, distances)
    }
}

/// Sequential variant of [`metric_completion`]; the no-rayon fallback and
/// the benchmark baseline.
pub fn metric_completion_seq(graph: &Graph, distances: &PairTable) -> PairTable {
    assert_eq!(graph.node_count(), distances.node_count());
    let rows: Vec<Vec<f64>> = (0..graph.node_count() as u32)
        .map(|i| completion_row(graph, distances, i))
        .collect();
    assemble(graph.node_count(), rows)
}

fn violations_from(distances: &PairTable, i: u32, tol: f64) -> Vec<TriangleViolation> {
    let n = distances.node_count() as u32;
    let mut out = Vec::new();
    for j in i + 1..n {
        let dij = distances.get(i, j);
        for k in j + 1..n {
            let djk = distances.get(j, k);
            let dik = distances.get(i, k);
            for (long, a, b, pair) in [
                (dik, dij, djk, (i, k)),
                (djk, dij, dik, (j, k)),
                (dij, djk, dik, (i, j)),
            ] {
                let excess = long - a - b;
                if excess > tol {
                    out.push(TriangleViolation {
                        triple: (i, j, k),
                        long_pair: pair,
                        amount: excess,
                    });
                }
            }
        }
    }
    out
}

/// Checks all `3·C(n,3)` triangle orientations of a full distance table,
/// returning the triples violated by more than `tol`. An empty result means
/// the table is a `[0,1]` pseudo-metric within tolerance.
pub fn verify_triangle_inequalities(distances: &PairTable, tol: f64) -> Vec<TriangleViolation> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..distances.node_count() as u32)
            .into_par_iter()
            .flat_map_iter(|i| violations_from(distances, i, tol))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        verify_triangle_inequalities_seq(distances, tol)
    }
}

/// Sequential variant of [`verify_triangle_inequalities`].
pub fn verify_triangle_inequalities_seq(
    distances: &PairTable,
    tol: f64,
) -> Vec<TriangleViolation> {
    (0..distances.node_count() as u32)
        .flat_map(|i| violations_from(distances, i, tol))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn completes_path_distances() {
        let g = p3();
        let mut d = PairTable::filled(3, 0.0);
        d.set(0, 1, 0.3);
        d.set(1, 2, 0.4);
        d.set(0, 2, 0.0); // not edge-supported; ignored by completion
        let full = metric_completion(&g, &d);
        assert!((full.get(0, 2) - 0.7).abs() < 1e-12);
        assert!((full.get(0, 1) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn clips_at_one() {
        let g = p3();
        let mut d = PairTable::filled(3, 0.0);
        d.set(0, 1, 0.8);
        d.set(1, 2, 0.9);
        let full = metric_completion(&g, &d);
        assert!((full.get(0, 2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unreachable_pairs_get_one() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let d = PairTable::filled(4, 0.2);
        let full = metric_completion(&g, &d);
        assert!((full.get(0, 2) - 1.0).abs() < 1e-12);
        assert!((full.get(1, 3) - 1.0).abs() < 1e-12);
        assert!((full.get(0, 1) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn completion_is_always_a_pseudo_metric() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)])
            .unwrap();
        let mut d = PairTable::filled(5, 0.0);
        let mut v = 0.13;
        for (i, j) in g.edges() {
            d.set(i, j, v);
            v = (v * 7.3) % 1.0;
        }
        let full = metric_completion(&g, &d);
        assert!(verify_triangle_inequalities(&full, 1e-12).is_empty());
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)])
            .unwrap();
        let mut d = PairTable::filled(6, 0.0);
        let mut v = 0.37;
        for (i, j) in g.edges() {
            d.set(i, j, v);
            v = (v * 3.7) % 1.0;
        }
        assert_eq!(metric_completion(&g, &d), metric_completion_seq(&g, &d));
    }

    #[test]
    fn audit_accepts_constant_tables() {
        for value in [0.0, 1.0] {
            let d = PairTable::filled(6, value);
            assert!(verify_triangle_inequalities(&d, 1e-9).is_empty());
        }
    }

    #[test]
    fn audit_flags_the_violated_orientation() {
        let mut d = PairTable::filled(3, 0.0);
        d.set(0, 1, 1.0);
        let violations = verify_triangle_inequalities(&d, 1e-9);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].long_pair, (0, 1));
        assert!((violations[0].amount - 1.0).abs() < 1e-12);
        assert_eq!(
            violations,
            verify_triangle_inequalities_seq(&d, 1e-9)
        );
    }
}
