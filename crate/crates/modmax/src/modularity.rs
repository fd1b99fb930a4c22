//! Partitions and modularity: the quality function `Q`, its bipartition
//! quadratic form, and the expected modularity of random community
//! groupings.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use crate::{Error, Result};

/// Assignment of every node to exactly one community.
///
/// Stored in canonical form: community ids are contiguous `0..k` and ordered
/// by smallest member node id, so two partitions are equal iff they induce
/// the same grouping.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    assignment: Vec<u32>,
    community_count: usize,
}

impl Partition {
    /// Canonicalizes an arbitrary `node -> community id` assignment.
    pub fn from_assignment(raw: &[u32]) -> Partition {
        assert!(!raw.is_empty(), "partition of an empty node set");
        let mut remap: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
        let mut assignment = vec![0u32; raw.len()];
        let mut next = 0u32;
        for (node, &c) in raw.iter().enumerate() {
            let id = *remap.entry(c).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            });
            assignment[node] = id;
        }
        Partition { assignment, community_count: next as usize }
    }

    /// Every node in one community.
    pub fn single(node_count: usize) -> Partition {
        Partition { assignment: vec![0; node_count], community_count: 1 }
    }

    /// Every node its own community.
    pub fn singletons(node_count: usize) -> Partition {
        Partition {
            assignment: (0..node_count as u32).collect(),
            community_count: node_count,
        }
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    pub fn community_of(&self, node: u32) -> u32 {
        self.assignment[node as usize]
    }

    /// The membership array: entry `i` is the community id of node `i`.
    pub fn membership(&self) -> &[u32] {
        &self.assignment
    }

    pub fn communities(&self) -> Vec<Vec<u32>> {
        let mut groups = vec![Vec::new(); self.community_count];
        for (node, &c) in self.assignment.iter().enumerate() {
            groups[c as usize].push(node as u32);
        }
        groups
    }

    /// True when `i` and `j` are co-members.
    pub fn together(&self, i: u32, j: u32) -> bool {
        self.assignment[i as usize] == self.assignment[j as usize]
    }
}

/// A modularity value together with the scale it was computed at.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ModularityValue {
    pub q: f64,
    pub lambda: f64,
}

/// Modularity of a partition at scale `lambda`:
/// `(1/2m) * sum_{i,j} (A_ij - lambda d_i d_j / 2m) delta_ij`, the sum over
/// ordered pairs including the diagonal.
///
/// Computed in `O(m + n)` from per-community intra-edge counts and degree
/// sums rather than by pairwise summation.
pub fn modularity(graph: &Graph, partition: &Partition, lambda: f64) -> Result<ModularityValue> {
    assert!(lambda > 0.0, "lambda must be positive");
    if partition.node_count() != graph.node_count() {
        return Err(Error::PartitionMismatch(format!(
            "graph has {} nodes, partition covers {}",
            graph.node_count(),
            partition.node_count()
        )));
    }
    let k = partition.community_count();
    let mut intra_edges = vec![0usize; k];
    let mut degree_sum = vec![0f64; k];
    for (u, v) in graph.edges() {
        if partition.together(u, v) {
            intra_edges[partition.community_of(u) as usize] += 1;
        }
    }
    for node in 0..graph.node_count() as u32 {
        degree_sum[partition.community_of(node) as usize] += graph.degree(node) as f64;
    }
    let m = graph.edge_count() as f64;
    let q = (0..k)
        .map(|c| intra_edges[c] as f64 / m - lambda * degree_sum[c] * degree_sum[c] / (4.0 * m * m))
        .sum();
    Ok(ModularityValue { q, lambda })
}

/// Modularity of the two-community division encoded by a `±1` vector,
/// evaluated through the quadratic form `x^T B x / 4m` (plus the constant
/// that makes it agree with [`modularity`] at every scale; the constant is
/// zero at `lambda = 1`).
pub fn modularity_bipartition(graph: &Graph, signs: &[i8], lambda: f64) -> Result<ModularityValue> {
    if signs.len() != graph.node_count() {
        return Err(Error::Dimension { expected: graph.node_count(), actual: signs.len() });
    }
    if let Some(bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
        return Err(Error::Domain(format!("bipartition entries must be ±1, got {bad}")));
    }
    let m = graph.edge_count() as f64;
    let edge_term: f64 = graph
        .edges()
        .map(|(u, v)| (signs[u as usize] as f64) * (signs[v as usize] as f64))
        .sum();
    let weighted_sign_sum: f64 = (0..graph.node_count())
        .map(|i| graph.degree(i as u32) as f64 * signs[i] as f64)
        .sum();
    let quad = 2.0 * edge_term - lambda * weighted_sign_sum * weighted_sign_sum / (2.0 * m);
    let q = quad / (4.0 * m) + (1.0 - lambda) / 2.0;
    Ok(ModularityValue { q, lambda })
}

/// Merges the communities of `partition` into at most `k` groups, each
/// community drawing its group independently and uniformly. Empty groups
/// disappear under canonicalization, so the result may have fewer than `k`
/// communities.
pub fn random_k_grouping<R: Rng>(partition: &Partition, k: usize, rng: &mut R) -> Partition {
    assert!(k >= 1);
    let groups: Vec<u32> = (0..partition.community_count())
        .map(|_| rng.gen_range(0..k as u32))
        .collect();
    group_by(partition, &groups)
}

fn group_by(partition: &Partition, groups: &[u32]) -> Partition {
    let raw: Vec<u32> = partition
        .membership()
        .iter()
        .map(|&c| groups[c as usize])
        .collect();
    Partition::from_assignment(&raw)
}

/// How to average over random groupings.
#[derive(Debug, Clone, Copy)]
pub enum GroupingMode {
    /// Enumerate all `k^c` group assignments (guarded against blowup).
    Exhaustive,
    /// Sample independently seeded trials.
    MonteCarlo { trials: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GroupingEstimate {
    pub mean: f64,
    pub std_error: f64,
}

const EXHAUSTIVE_CAP: u128 = 1_000_000;

/// Expected modularity after randomly grouping the communities of
/// `partition` into `k` groups (at `lambda = 1`).
///
/// Exhaustive mode returns the exact expectation, which equals
/// `(1 - 1/k) * Q(partition)`; Monte-Carlo mode converges to it. For a fixed
/// seed the Monte-Carlo result is identical whether trials run sequentially
/// or in parallel (per-trial substreams, sequential reduction).
pub fn expected_grouping_modularity(
    graph: &Graph,
    partition: &Partition,
    k: usize,
    mode: GroupingMode,
) -> Result<GroupingEstimate> {
    assert!(k >= 1);
    if partition.node_count() != graph.node_count() {
        return Err(Error::PartitionMismatch(format!(
            "graph has {} nodes, partition covers {}",
            graph.node_count(),
            partition.node_count()
        )));
    }
    if k == 1 {
        // Everything merges into one community, whose modularity is 0.
        return Ok(GroupingEstimate { mean: 0.0, std_error: 0.0 });
    }
    match mode {
        GroupingMode::Exhaustive => {
            let c = partition.community_count();
            let count = (k as u128).checked_pow(c as u32).unwrap_or(u128::MAX);
            if count > EXHAUSTIVE_CAP {
                return Err(Error::EnumerationBlowup { count, cap: EXHAUSTIVE_CAP });
            }
            let mut groups = vec![0u32; c];
            let mut sum = 0.0;
            loop {
                let grouped = group_by(partition, &groups);
                sum += modularity(graph, &grouped, 1.0)?.q;
                // Odometer over the k^c assignments.
                let mut pos = 0;
                loop {
                    if pos == c {
                        let mean = sum / count as f64;
                        return Ok(GroupingEstimate { mean, std_error: 0.0 });
                    }
                    groups[pos] += 1;
                    if groups[pos] < k as u32 {
                        break;
                    }
                    groups[pos] = 0;
                    pos += 1;
                }
            }
        }
        GroupingMode::MonteCarlo { trials, seed } => {
            assert!(trials > 0);
            let mut master = ChaCha8Rng::seed_from_u64(seed);
            let trial_seeds: Vec<u64> = (0..trials).map(|_| master.gen()).collect();
            let samples = monte_carlo_samples(graph, partition, k, &trial_seeds);
            let n = trials as f64;
            let mean = samples.iter().sum::<f64>() / n;
            let var = samples.iter().map(|q| (q - mean) * (q - mean)).sum::<f64>()
                / (n - 1.0).max(1.0);
            Ok(GroupingEstimate { mean, std_error: (var / n).sqrt() })
        }
    }
}

fn sample_one(graph: &Graph, partition: &Partition, k: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grouped = random_k_grouping(partition, k, &mut rng);
    modularity(graph, &grouped, 1.0).expect("partition covers the graph").q
}

#[cfg(feature = "parallel")]
fn monte_carlo_samples(graph: &Graph, partition: &Partition, k: usize, seeds: &[u64]) -> Vec<f64> {
    use rayon::prelude::*;
    seeds.par_iter().map(|&s| sample_one(graph, partition, k, s)).collect()
}

#[cfg(not(feature = "parallel"))]
fn monte_carlo_samples(graph: &Graph, partition: &Partition, k: usize, seeds: &[u64]) -> Vec<f64> {
    monte_carlo_samples_seq(graph, partition, k, seeds)
}

/// Sequential Monte-Carlo sampling; the fallback when the `parallel` feature
/// is disabled, and the baseline the benchmarks compare against.
pub fn monte_carlo_samples_seq(
    graph: &Graph,
    partition: &Partition,
    k: usize,
    seeds: &[u64],
) -> Vec<f64> {
    seeds.iter().map(|&s| sample_one(graph, partition, k, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_edge_list, ParseOptions};

    fn graph(text: &str) -> Graph {
        parse_edge_list(text, &ParseOptions::default()).unwrap().graph
    }

    fn two_triangles() -> Graph {
        graph("0 1\n1 2\n2 0\n3 4\n4 5\n5 3")
    }

    /// Direct evaluation of the defining double sum over ordered pairs
    /// including the diagonal; the oracle the fast path is checked against.
    fn modularity_bruteforce(g: &Graph, p: &Partition, lambda: f64) -> f64 {
        let n = g.node_count() as u32;
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                if p.together(i, j) {
                    q += g.modularity_entry(i, j, lambda);
                }
            }
        }
        q / (2.0 * g.edge_count() as f64)
    }

    #[test]
    fn two_triangles_split_scores_half() {
        let g = two_triangles();
        let p = Partition::from_assignment(&[0, 0, 0, 1, 1, 1]);
        let oracle = modularity_bruteforce(&g, &p, 1.0);
        assert!((oracle - 0.5).abs() < 1e-12);
        assert!((modularity(&g, &p, 1.0).unwrap().q - oracle).abs() < 1e-12);
    }

    #[test]
    fn single_community_is_zero() {
        for g in [graph("0 1"), two_triangles(), graph("0 1\n1 2\n2 0\n2 3")] {
            let q = modularity(&g, &Partition::single(g.node_count()), 1.0).unwrap().q;
            assert!(q.abs() < 1e-12);
        }
    }

    #[test]
    fn singletons_value_is_minus_degree_square_over_4m2() {
        let g = graph("0 1\n1 2\n2 0");
        let q = modularity(&g, &Partition::singletons(3), 1.0).unwrap().q;
        assert!((q + 1.0 / 3.0).abs() < 1e-12);

        for g in [two_triangles(), graph("0 1\n1 2\n2 3\n3 0\n0 2")] {
            let s = g.stats();
            let expect = -(s.degree_square_sum as f64)
                / (4.0 * (s.edge_count * s.edge_count) as f64);
            let q = modularity(&g, &Partition::singletons(g.node_count()), 1.0).unwrap().q;
            assert!((q - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn fast_path_matches_bruteforce_on_random_partitions() {
        let g = graph("0 1\n1 2\n2 0\n2 3\n3 4\n4 5\n5 3\n1 4");
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let raw: Vec<u32> =
                (0..g.node_count()).map(|_| rng.gen_range(0..4)).collect();
            let p = Partition::from_assignment(&raw);
            for lambda in [0.5, 1.0, 2.0] {
                let fast = modularity(&g, &p, lambda).unwrap().q;
                let slow = modularity_bruteforce(&g, &p, lambda);
                assert!((fast - slow).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bipartition_matches_partition_modularity() {
        let g = two_triangles();
        let x = [1i8, 1, 1, -1, -1, -1];
        let q = modularity_bipartition(&g, &x, 1.0).unwrap().q;
        assert!((q - 0.5).abs() < 1e-12);

        // All same sign: the single community, zero at lambda = 1.
        let q1 = modularity_bipartition(&g, &[1; 6], 1.0).unwrap().q;
        assert!(q1.abs() < 1e-12);

        // Single edge, opposite signs: hand value -1/2.
        let e = graph("0 1");
        let q2 = modularity_bipartition(&e, &[1, -1], 1.0).unwrap().q;
        assert!((q2 + 0.5).abs() < 1e-12);
    }

    #[test]
    fn bipartition_rejects_bad_entries() {
        let g = graph("0 1");
        assert!(modularity_bipartition(&g, &[1, 0], 1.0).is_err());
        assert!(modularity_bipartition(&g, &[1], 1.0).is_err());
    }

    #[test]
    fn canonical_form_ignores_community_relabeling() {
        let a = Partition::from_assignment(&[2, 2, 0, 1, 1, 0]);
        let b = Partition::from_assignment(&[0, 0, 1, 2, 2, 1]);
        assert_eq!(a, b);
        let g = two_triangles();
        assert_eq!(
            modularity(&g, &a, 1.0).unwrap().q,
            modularity(&g, &b, 1.0).unwrap().q
        );
    }

    #[test]
    fn grouping_single_community_is_fixed_point() {
        let p = Partition::single(5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(random_k_grouping(&p, 4, &mut rng), p);
    }

    #[test]
    fn grouping_never_increases_community_count() {
        let p = Partition::from_assignment(&[0, 1, 2, 3, 4, 5]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in [2, 3, 10, 100] {
            let grouped = random_k_grouping(&p, k, &mut rng);
            assert!(grouped.community_count() <= p.community_count());
        }
    }

    #[test]
    fn exhaustive_two_triangles_k2_mean_is_quarter() {
        let g = two_triangles();
        let p = Partition::from_assignment(&[0, 0, 0, 1, 1, 1]);
        let est =
            expected_grouping_modularity(&g, &p, 2, GroupingMode::Exhaustive).unwrap();
        // Average of {0, 0, 0.5, 0.5} over the four equally likely assignments.
        assert!((est.mean - 0.25).abs() < 1e-12);
    }

    #[test]
    fn k1_mean_is_zero() {
        let g = two_triangles();
        let p = Partition::from_assignment(&[0, 0, 0, 1, 1, 1]);
        let est =
            expected_grouping_modularity(&g, &p, 1, GroupingMode::Exhaustive).unwrap();
        assert_eq!(est.mean, 0.0);
    }

    #[test]
    fn exhaustive_guard_trips() {
        let g = graph((0..30).map(|i| format!("{i} {}\n", i + 1)).collect::<String>().as_str());
        let p = Partition::singletons(g.node_count());
        let err = expected_grouping_modularity(&g, &p, 3, GroupingMode::Exhaustive);
        assert!(matches!(err, Err(Error::EnumerationBlowup { .. })));
    }

    #[test]
    fn monte_carlo_is_seed_deterministic() {
        let g = two_triangles();
        let p = Partition::from_assignment(&[0, 0, 0, 1, 1, 1]);
        let mode = GroupingMode::MonteCarlo { trials: 500, seed: 42 };
        let a = expected_grouping_modularity(&g, &p, 2, mode).unwrap();
        let b = expected_grouping_modularity(&g, &p, 2, mode).unwrap();
        assert_eq!(a, b);
        // And matches the sequential path bit for bit.
        let mut master = ChaCha8Rng::seed_from_u64(42);
        let seeds: Vec<u64> = (0..500).map(|_| master.gen()).collect();
        let seq = monte_carlo_samples_seq(&g, &p, 2, &seeds);
        let mean = seq.iter().sum::<f64>() / 500.0;
        assert_eq!(a.mean, mean);
    }

    #[test]
    fn lambda_strictly_decreases_q_with_intra_pairs() {
        let g = two_triangles();
        let p = Partition::from_assignment(&[0, 0, 0, 1, 1, 1]);
        let qs: Vec<f64> = [0.5, 1.0, 1.5, 2.0]
            .iter()
            .map(|&l| modularity(&g, &p, l).unwrap().q)
            .collect();
        for w in qs.windows(2) {
            assert!(w[1] < w[0]);
        }
    }
}
