//! Simple undirected graphs: edge-list ingestion, degree statistics and
//! on-demand modularity-matrix entries.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::{Error, Result};

/// Simple undirected graph over dense node ids `0..n`.
///
/// Invariants: no self-loops, no duplicate edges, adjacency lists sorted and
/// symmetric, no isolated vertices, `sum(degree) == 2m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<u32>>,
    edge_count: usize,
    labels: Option<Vec<String>>,
}

/// Degree statistics of a graph.
///
/// `degree_concentration` is the dimensionless quantity `sum(d_i^2) / (8 m^2)`
/// that controls the leaf lower bound of the Following heuristic.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub degree_sum: usize,
    pub degree_square_sum: usize,
    pub max_degree: usize,
    pub degree_concentration: f64,
}

/// Options for [`parse_edge_list`].
#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Treat numeric labels as 1-indexed and shift them down by one.
    pub one_indexed: bool,
    /// Lines starting with this character are skipped.
    pub comment_prefix: char,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { one_indexed: false, comment_prefix: '#' }
    }
}

/// A parsed graph plus ingestion warnings.
#[derive(Debug)]
pub struct ParsedGraph {
    pub graph: Graph,
    /// Number of duplicate edge lines collapsed into their first occurrence.
    pub duplicate_edges: usize,
    /// Number of isolated vertices dropped during cleanup.
    pub dropped_isolated: usize,
}

impl Graph {
    /// Builds a graph from an edge set over `0..n`, collapsing duplicates and
    /// dropping isolated vertices (remaining nodes are re-indexed densely).
    ///
    /// Self-loops are an input error; they usually indicate a broken dataset.
    pub fn from_edges(node_count: usize, edges: &[(u32, u32)]) -> Result<Graph> {
        let (graph, _, _) = build(node_count, edges, None)?;
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, node: u32) -> usize {
        self.adjacency[node as usize].len()
    }

    pub fn neighbors(&self, node: u32) -> &[u32] {
        &self.adjacency[node as usize]
    }

    pub fn has_edge(&self, i: u32, j: u32) -> bool {
        self.adjacency[i as usize].binary_search(&j).is_ok()
    }

    /// Original input label of a node, when the graph came from a labeled
    /// edge list.
    pub fn label(&self, node: u32) -> Option<&str> {
        self.labels.as_ref().map(|l| l[node as usize].as_str())
    }

    /// Iterates every edge once as `(u, v)` with `u < v`, ordered.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, nbrs)| {
            let u = u as u32;
            nbrs.iter().copied().filter(move |&v| u < v).map(move |v| (u, v))
        })
    }

    /// Entry `A_ij - lambda * d_i * d_j / 2m` of the (multi-scale) modularity
    /// matrix, computed on demand. Symmetric in `(i, j)`.
    pub fn modularity_entry(&self, i: u32, j: u32, lambda: f64) -> f64 {
        assert!(lambda > 0.0, "lambda must be positive");
        let a = if i != j && self.has_edge(i, j) { 1.0 } else { 0.0 };
        let two_m = 2.0 * self.edge_count as f64;
        a - lambda * (self.degree(i) as f64) * (self.degree(j) as f64) / two_m
    }

    pub fn stats(&self) -> GraphStats {
        let mut degree_square_sum = 0usize;
        let mut max_degree = 0usize;
        for nbrs in &self.adjacency {
            let d = nbrs.len();
            degree_square_sum += d * d;
            max_degree = max_degree.max(d);
        }
        let m = self.edge_count as f64;
        GraphStats {
            node_count: self.node_count(),
            edge_count: self.edge_count,
            degree_sum: 2 * self.edge_count,
            degree_square_sum,
            max_degree,
            degree_concentration: degree_square_sum as f64 / (8.0 * m * m),
        }
    }

    /// Serializes back to the edge-list text format (one `u v` per line,
    /// labels preserved when present).
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            match (&self.label(u), &self.label(v)) {
                (Some(lu), Some(lv)) => writeln!(out, "{lu} {lv}").unwrap(),
                _ => writeln!(out, "{u} {v}").unwrap(),
            }
        }
        out
    }
}

/// Parses the `u v` edge-list format: one edge per line, whitespace-separated
/// labels, comment and blank lines skipped. Node ids are assigned densely in
/// first-appearance order.
pub fn parse_edge_list(text: &str, options: &ParseOptions) -> Result<ParsedGraph> {
    let mut label_to_id: HashMap<String, u32> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();

    let mut intern = |token: &str, line: usize| -> Result<u32> {
        let label = if options.one_indexed {
            match token.parse::<u64>() {
                Ok(0) => {
                    return Err(Error::Parse {
                        line,
                        message: "node id 0 in one-indexed input".into(),
                    })
                }
                Ok(v) => (v - 1).to_string(),
                Err(_) => token.to_string(),
            }
        } else {
            token.to_string()
        };
        if let Some(&id) = label_to_id.get(&label) {
            return Ok(id);
        }
        let id = labels.len() as u32;
        label_to_id.insert(label.clone(), id);
        labels.push(label);
        Ok(id)
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with(options.comment_prefix) {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected two node tokens, got {line:?}"),
                })
            }
        };
        let u = intern(a, line_no)?;
        let v = intern(b, line_no)?;
        if u == v {
            return Err(Error::Parse {
                line: line_no,
                message: format!("self-loop on node {a:?}"),
            });
        }
        edges.push((u, v));
    }

    let (graph, duplicate_edges, dropped_isolated) =
        build(labels.len(), &edges, Some(labels))?;
    Ok(ParsedGraph { graph, duplicate_edges, dropped_isolated })
}

fn build(
    node_count: usize,
    edges: &[(u32, u32)],
    labels: Option<Vec<String>>,
) -> Result<(Graph, usize, usize)> {
    let mut canonical: Vec<(u32, u32)> = Vec::with_capacity(edges.len());
    for &(u, v) in edges {
        assert!((u as usize) < node_count && (v as usize) < node_count, "node id out of range");
        if u == v {
            return Err(Error::Parse { line: 0, message: format!("self-loop on node {u}") });
        }
        canonical.push((u.min(v), u.max(v)));
    }
    canonical.sort_unstable();
    let before = canonical.len();
    canonical.dedup();
    let duplicate_edges = before - canonical.len();
    if canonical.is_empty() {
        return Err(Error::EmptyGraph);
    }

    let mut touched = vec![false; node_count];
    for &(u, v) in &canonical {
        touched[u as usize] = true;
        touched[v as usize] = true;
    }
    let dropped_isolated = touched.iter().filter(|&&t| !t).count();

    // Dense re-indexing that skips isolated vertices.
    let mut remap = vec![u32::MAX; node_count];
    let mut next = 0u32;
    for (old, &t) in touched.iter().enumerate() {
        if t {
            remap[old] = next;
            next += 1;
        }
    }

    let n = next as usize;
    let mut adjacency = vec![Vec::new(); n];
    for &(u, v) in &canonical {
        let (u, v) = (remap[u as usize], remap[v as usize]);
        adjacency[u as usize].push(v);
        adjacency[v as usize].push(u);
    }
    for nbrs in &mut adjacency {
        nbrs.sort_unstable();
    }
    let labels = labels.map(|all| {
        all.into_iter()
            .enumerate()
            .filter(|(old, _)| touched[*old])
            .map(|(_, l)| l)
            .collect()
    });

    let graph = Graph { adjacency, edge_count: canonical.len(), labels };
    debug_assert_eq!(
        graph.adjacency.iter().map(Vec::len).sum::<usize>(),
        2 * graph.edge_count
    );
    Ok((graph, duplicate_edges, dropped_isolated))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ParsedGraph {
        parse_edge_list(text, &ParseOptions::default()).unwrap()
    }

    #[test]
    fn parses_path_p3() {
        let p = parse("0 1\n1 2");
        assert_eq!(p.graph.node_count(), 3);
        assert_eq!(p.graph.edge_count(), 2);
        assert_eq!(p.duplicate_edges, 0);
    }

    #[test]
    fn collapses_duplicates_with_count() {
        let p = parse("0 1\n0 1\n1 0");
        assert_eq!(p.graph.node_count(), 2);
        assert_eq!(p.graph.edge_count(), 1);
        assert_eq!(p.duplicate_edges, 2);
    }

    #[test]
    fn labeled_triangle() {
        let p = parse("a b\nb c\nc a");
        assert_eq!(p.graph.node_count(), 3);
        assert_eq!(p.graph.edge_count(), 3);
        assert_eq!(p.graph.label(0), Some("a"));
        assert_eq!(p.graph.label(1), Some("b"));
        assert_eq!(p.graph.label(2), Some("c"));
        assert!(p.graph.has_edge(0, 2));
    }

    #[test]
    fn rejects_self_loop_with_line_number() {
        let err = parse_edge_list("0 1\n2 2\n", &ParseOptions::default()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_line() {
        let err = parse_edge_list("0 1 2\n", &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn rejects_empty_input() {
        let err = parse_edge_list("# nothing\n\n", &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyGraph));
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let p = parse("# triangle\n\n0 1\n1 2\n2 0\n");
        assert_eq!(p.graph.edge_count(), 3);
    }

    #[test]
    fn one_indexed_shifts_numeric_labels() {
        let opts = ParseOptions { one_indexed: true, ..Default::default() };
        let p = parse_edge_list("1 2\n2 3", &opts).unwrap();
        assert_eq!(p.graph.node_count(), 3);
        assert_eq!(p.graph.label(0), Some("0"));
        assert_eq!(p.graph.label(2), Some("2"));
        assert!(parse_edge_list("0 1", &opts).is_err());
    }

    #[test]
    fn degree_sum_is_twice_edge_count() {
        let p = parse("0 1\n1 2\n2 0\n2 3");
        let s = p.graph.stats();
        assert_eq!(s.degree_sum, 2 * s.edge_count);
    }

    #[test]
    fn modularity_entry_k3() {
        let g = parse("0 1\n1 2\n2 0").graph;
        // Off-diagonal entry of K3: 1 - (2*2)/6.
        assert!((g.modularity_entry(0, 1, 1.0) - 1.0 / 3.0).abs() < 1e-12);
        // Diagonal entry: -d_i^2 / 2m.
        assert!((g.modularity_entry(0, 0, 1.0) + 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(g.modularity_entry(0, 1, 1.0), g.modularity_entry(1, 0, 1.0));
    }

    #[test]
    fn modularity_rows_sum_to_zero_at_unit_scale() {
        let g = parse("0 1\n1 2\n2 0\n2 3\n3 4").graph;
        let n = g.node_count() as u32;
        for i in 0..n {
            let row: f64 = (0..n).map(|j| g.modularity_entry(i, j, 1.0)).sum();
            assert!(row.abs() < 1e-9, "row {i} sums to {row}");
        }
    }

    #[test]
    fn stats_hand_values() {
        let k3 = parse("0 1\n1 2\n2 0").graph.stats();
        assert_eq!((k3.node_count, k3.edge_count, k3.degree_square_sum), (3, 3, 12));
        assert!((k3.degree_concentration - 1.0 / 6.0).abs() < 1e-15);

        let edge = parse("0 1").graph.stats();
        assert!((edge.degree_concentration - 0.25).abs() < 1e-15);

        let star = parse("c a\nc b\nc d\nc e").graph.stats();
        assert_eq!((star.node_count, star.edge_count), (5, 4));
        assert_eq!(star.degree_square_sum, 20);
        assert_eq!(star.max_degree, 4);
        assert!((star.degree_concentration - 0.15625).abs() < 1e-15);
    }

    #[test]
    fn reserialization_roundtrips() {
        let g = parse("b a\na c\nc b\nc d").graph;
        let again = parse(&g.to_edge_list()).graph;
        let e1: Vec<_> = g.edges().collect();
        let e2: Vec<_> = again.edges().collect();
        assert_eq!(e1, e2);
    }

    #[test]
    fn from_edges_drops_isolated() {
        let g = Graph::from_edges(5, &[(0, 1), (3, 4)]).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(2, 3));
    }
}
