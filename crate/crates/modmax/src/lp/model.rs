//! Solver-independent descriptions of the complete and sparse metric
//! formulations.
//!
//! Both share one variable `d_ij in [0,1]` per unordered node pair and the
//! objective `(1/2m) sum B_ij (1 - d_ij)`, carried here as a per-pair
//! coefficient `-2 B_ij / 2m` plus an explicit constant so that the LP
//! objective of an integral solution equals the modularity of the decoded
//! partition. The complete kind enumerates all `3·C(n,3)` triangle
//! inequalities; the sparse kind keeps only those whose middle vertex is a
//! graph neighbor of an endpoint of the long side, at most `(n-1)·2m` rows.

use std::fmt::Write as _;

use crate::graph::Graph;
use crate::modularity::Partition;
use crate::pairs::{PairIndex, PairTable};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulationKind {
    Complete,
    Sparse,
}

/// One triangle row `d[left0] + d[left1] >= d[right]` over pair variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ConstraintRow {
    pub left: [usize; 2],
    pub right: usize,
}

impl ConstraintRow {
    /// Canonical identity used for set comparisons between formulations.
    pub fn canonical(&self) -> (usize, usize, usize) {
        let (a, b) = (self.left[0].min(self.left[1]), self.left[0].max(self.left[1]));
        (self.right, a, b)
    }
}

/// An LP/ILP over pair-distance variables.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub node_count: usize,
    pub edge_count: usize,
    pub pair_index: PairIndex,
    /// Objective coefficient per pair variable (maximization).
    pub objective: Vec<f64>,
    /// Constant objective term; `1 - lambda`, zero at the default scale.
    pub constant: f64,
    pub rows: Vec<ConstraintRow>,
    pub integral: bool,
    pub kind: FormulationKind,
    pub lambda: f64,
}

/// Default cap on the number of rows [`build_complete`] will emit.
pub const DEFAULT_ROW_CAP: u128 = 100_000_000;

/// Number of rows the complete formulation needs: `3·C(n,3)`.
pub fn complete_row_count(node_count: usize) -> u128 {
    let n = node_count as u128;
    n * (n - 1) * (n - 2) / 2
}

/// Whether [`build_complete`] would refuse this size at the default cap.
pub fn complete_over_capacity(node_count: usize) -> bool {
    complete_row_count(node_count) > DEFAULT_ROW_CAP
}

fn objective_terms(graph: &Graph, lambda: f64) -> (Vec<f64>, f64) {
    let pair_index = PairIndex::new(graph.node_count());
    let m = graph.edge_count() as f64;
    let mut coefficients = vec![0.0; pair_index.len()];
    for (i, j) in pair_index.iter() {
        coefficients[pair_index.index(i, j)] = -graph.modularity_entry(i, j, lambda) / m;
    }
    (coefficients, 1.0 - lambda)
}

/// Builds the complete metric formulation with all `3·C(n,3)` triangle
/// inequalities, refusing instances over [`DEFAULT_ROW_CAP`] rows.
pub fn build_complete(graph: &Graph, lambda: f64, integral: bool) -> Result<LpProblem> {
    build_complete_with_cap(graph, lambda, integral, DEFAULT_ROW_CAP)
}

pub fn build_complete_with_cap(
    graph: &Graph,
    lambda: f64,
    integral: bool,
    row_cap: u128,
) -> Result<LpProblem> {
    assert!(lambda > 0.0);
    let n = graph.node_count();
    assert!(n >= 2, "need at least one pair variable");
    let rows_needed = complete_row_count(n);
    if rows_needed > row_cap {
        return Err(Error::Capacity { rows: rows_needed, cap: row_cap });
    }
    let pair_index = PairIndex::new(n);
    let mut rows = Vec::with_capacity(rows_needed as usize);
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            let ij = pair_index.index(i, j);
            for k in j + 1..n as u32 {
                let jk = pair_index.index(j, k);
                let ik = pair_index.index(i, k);
                rows.push(ConstraintRow { left: [ij, jk], right: ik });
                rows.push(ConstraintRow { left: [ij, ik], right: jk });
                rows.push(ConstraintRow { left: [jk, ik], right: ij });
            }
        }
    }
    let (objective, constant) = objective_terms(graph, lambda);
    Ok(LpProblem {
        node_count: n,
        edge_count: graph.edge_count(),
        pair_index,
        objective,
        constant,
        rows,
        integral,
        kind: FormulationKind::Complete,
        lambda,
    })
}

/// Builds the sparse metric formulation: for every pair `{i, j}` and every
/// middle vertex `k` adjacent to `i` or `j`, the row `d_ik + d_kj >= d_ij`.
///
/// A row is identified by its long side and middle vertex, so each is
/// emitted once; the total is bounded by `(n-1)·2m`.
pub fn build_sparse(graph: &Graph, lambda: f64, integral: bool) -> Result<LpProblem> {
    assert!(lambda > 0.0);
    let n = graph.node_count();
    assert!(n >= 2, "need at least one pair variable");
    let pair_index = PairIndex::new(n);
    let mut rows = Vec::new();
    let mut middles: Vec<u32> = Vec::new();
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            middles.clear();
            middles.extend(
                merge_sorted(graph.neighbors(i), graph.neighbors(j))
                    .filter(|&k| k != i && k != j),
            );
            let ij = pair_index.index(i, j);
            for &k in &middles {
                rows.push(ConstraintRow {
                    left: [pair_index.index(i, k), pair_index.index(k, j)],
                    right: ij,
                });
            }
        }
    }
    debug_assert!(rows.len() <= (n - 1) * 2 * graph.edge_count());
    let (objective, constant) = objective_terms(graph, lambda);
    Ok(LpProblem {
        node_count: n,
        edge_count: graph.edge_count(),
        pair_index,
        objective,
        constant,
        rows,
        integral,
        kind: FormulationKind::Sparse,
        lambda,
    })
}

/// Merges two sorted neighbor lists, deduplicating.
fn merge_sorted<'a>(a: &'a [u32], b: &'a [u32]) -> impl Iterator<Item = u32> + 'a {
    let mut ia = 0;
    let mut ib = 0;
    std::iter::from_fn(move || {
        let next = match (a.get(ia), b.get(ib)) {
            (Some(&x), Some(&y)) if x < y => {
                ia += 1;
                x
            }
            (Some(&x), Some(&y)) if x > y => {
                ib += 1;
                y
            }
            (Some(&x), Some(_)) => {
                ia += 1;
                ib += 1;
                x
            }
            (Some(&x), None) => {
                ia += 1;
                x
            }
            (None, Some(&y)) => {
                ib += 1;
                y
            }
            (None, None) => return None,
        };
        Some(next)
    })
}

impl LpProblem {
    pub fn variable_count(&self) -> usize {
        self.pair_index.len()
    }

    pub fn constraint_count(&self) -> usize {
        self.rows.len()
    }

    /// Objective at a distance vector, on the modularity scale: for an
    /// integral `d` encoding a partition this equals its modularity.
    pub fn objective_value(&self, distances: &[f64]) -> Result<f64> {
        if distances.len() != self.variable_count() {
            return Err(Error::Dimension {
                expected: self.variable_count(),
                actual: distances.len(),
            });
        }
        let dot: f64 = self
            .objective
            .iter()
            .zip(distances)
            .map(|(c, d)| c * d)
            .sum();
        Ok(self.constant + dot)
    }

    /// Writes the problem in the text LP interchange format, variables named
    /// `d_i_j`. The constant objective term, when nonzero, is recorded as a
    /// comment for solver portability.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "\\ modularity {} metric formulation: n={}, m={}, lambda={}",
            match self.kind {
                FormulationKind::Complete => "complete",
                FormulationKind::Sparse => "sparse",
            },
            self.node_count,
            self.edge_count,
            self.lambda
        )
        .unwrap();
        if self.constant != 0.0 {
            writeln!(out, "\\ objective constant term (add to optimum): {}", self.constant)
                .unwrap();
        }
        let name = |var: usize| {
            let (i, j) = self.pair_index.pair(var);
            format!("d_{i}_{j}")
        };
        out.push_str("Maximize\n obj:");
        for (var, &c) in self.objective.iter().enumerate() {
            if var % 6 == 0 && var > 0 {
                out.push_str("\n     ");
            }
            let sign = if c < 0.0 { '-' } else { '+' };
            write!(out, " {sign} {} {}", c.abs(), name(var)).unwrap();
        }
        out.push_str("\nSubject To\n");
        for (r, row) in self.rows.iter().enumerate() {
            writeln!(
                out,
                " t{r}: {} + {} - {} >= 0",
                name(row.left[0]),
                name(row.left[1]),
                name(row.right)
            )
            .unwrap();
        }
        out.push_str("Bounds\n");
        for var in 0..self.variable_count() {
            writeln!(out, " 0 <= {} <= 1", name(var)).unwrap();
        }
        if self.integral {
            out.push_str("Binary\n");
            for var in 0..self.variable_count() {
                writeln!(out, " {}", name(var)).unwrap();
            }
        }
        out.push_str("End\n");
        out
    }
}

/// Counts constraint rows in LP-format text; used to check that exports
/// round-trip the constraint count exactly.
pub fn count_lp_format_rows(text: &str) -> usize {
    let mut in_rows = false;
    let mut count = 0;
    for line in text.lines() {
        let t = line.trim();
        if t.eq_ignore_ascii_case("subject to") {
            in_rows = true;
        } else if t.eq_ignore_ascii_case("bounds") || t.eq_ignore_ascii_case("end") {
            in_rows = false;
        } else if in_rows && t.contains(">=") {
            count += 1;
        }
    }
    count
}

/// Encodes a partition as the integral distance vector `d_ij = 1 - delta_ij`.
pub fn encode_partition(partition: &Partition) -> PairTable {
    let n = partition.node_count();
    let mut table = PairTable::filled(n, 1.0);
    for (i, j) in PairIndex::new(n).iter() {
        if partition.together(i, j) {
            table.set(i, j, 0.0);
        }
    }
    table
}

/// Decodes near-integral distances to a partition: communities are the
/// connected components of the zero-distance relation over all node pairs.
pub fn decode_distances(distances: &PairTable, tol: f64) -> Partition {
    let n = distances.node_count();
    let mut dsu: Vec<u32> = (0..n as u32).collect();
    fn find(dsu: &mut [u32], x: u32) -> u32 {
        let mut root = x;
        while dsu[root as usize] != root {
            root = dsu[root as usize];
        }
        let mut cur = x;
        while dsu[cur as usize] != root {
            let next = dsu[cur as usize];
            dsu[cur as usize] = root;
            cur = next;
        }
        root
    }
    for (i, j) in distances.pair_index().iter() {
        if distances.get(i, j) <= tol {
            let (ri, rj) = (find(&mut dsu, i), find(&mut dsu, j));
            if ri != rj {
                dsu[ri.max(rj) as usize] = ri.min(rj);
            }
        }
    }
    let raw: Vec<u32> = (0..n as u32).map(|v| find(&mut dsu, v)).collect();
    Partition::from_assignment(&raw)
}
