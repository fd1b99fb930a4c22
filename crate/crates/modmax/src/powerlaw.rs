//! The `P(alpha, beta)` power-law degree model: `floor(e^alpha / x^beta)`
//! vertices of degree `x` up to the maximum degree `e^(alpha/beta)`,
//! realized either exactly (Havel-Hakimi plus degree-preserving edge swaps)
//! or approximately (configuration model with erasure).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

use crate::graph::Graph;
use crate::zeta::riemann_zeta;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RealizationMode {
    /// Exact-degree realization: deterministic Havel-Hakimi construction
    /// randomized by `swap_rounds * m` double-edge swaps.
    HavelHakimiShuffled,
    /// Random stub matching with self-loops and duplicates erased; realized
    /// degrees may fall below their targets.
    ConfigurationErased,
}

/// Generation parameters. `alpha_exp` is `e^alpha`, the count of degree-1
/// vertices the model asks for.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PowerLawSpec {
    pub alpha_exp: f64,
    pub beta: f64,
    pub seed: u64,
    pub realization: RealizationMode,
    pub swap_rounds: usize,
}

impl PowerLawSpec {
    pub fn new(alpha_exp: f64, beta: f64, seed: u64) -> PowerLawSpec {
        PowerLawSpec {
            alpha_exp,
            beta,
            seed,
            realization: RealizationMode::HavelHakimiShuffled,
            swap_rounds: 10,
        }
    }
}

/// Target degree multiset, ascending, plus whether parity forced a bump.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    pub degrees: Vec<u32>,
    pub parity_adjusted: bool,
}

/// Closed-form model statistics per growth-rate case.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ModelStats {
    pub n_theory: f64,
    pub m_theory: f64,
    pub max_degree_theory: f64,
}

/// A realized graph plus how many stub pairings the erasure dropped
/// (always zero in exact mode).
#[derive(Debug, Clone)]
pub struct Realization {
    pub graph: Graph,
    pub erased_edges: usize,
}

/// Emits `floor(alpha_exp / x^beta)` vertices of degree `x` for
/// `x = 1 .. floor(alpha_exp^(1/beta))`, bumping one minimum-degree vertex
/// when the total is odd.
pub fn degree_sequence(alpha_exp: f64, beta: f64) -> Result<DegreeSequence> {
    if !(alpha_exp >= 1.0) || !(beta > 0.0) {
        return Err(Error::Domain(format!(
            "need e^alpha >= 1 and beta > 0, got e^alpha={alpha_exp}, beta={beta}"
        )));
    }
    let max_degree = alpha_exp.powf(1.0 / beta).floor() as u32;
    let mut degrees = Vec::new();
    for x in 1..=max_degree.max(1) {
        let count = (alpha_exp / (x as f64).powf(beta)).floor() as usize;
        degrees.extend(std::iter::repeat(x).take(count));
    }
    if degrees.is_empty() {
        return Err(Error::Domain(format!("e^alpha={alpha_exp} yields an empty graph")));
    }
    let parity_adjusted = degrees.iter().map(|&d| d as u64).sum::<u64>() % 2 == 1;
    if parity_adjusted {
        // The list is ascending, so entry 0 has minimum degree.
        degrees[0] += 1;
        degrees.sort_unstable();
    }
    Ok(DegreeSequence { degrees, parity_adjusted })
}

/// Erdos-Gallai graphicality test (degree sum must also be even). On
/// failure reports the first violated prefix length `k`.
pub fn check_graphical(degrees: &[u32]) -> Result<()> {
    if degrees.iter().map(|&d| d as u64).sum::<u64>() % 2 == 1 {
        return Err(Error::Domain("degree sum is odd".into()));
    }
    let mut sorted: Vec<u64> = degrees.iter().map(|&d| d as u64).collect();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let n = sorted.len();
    let mut prefix = vec![0u64; n + 1];
    for (i, &d) in sorted.iter().enumerate() {
        prefix[i + 1] = prefix[i] + d;
    }
    for k in 1..=n {
        let k64 = k as u64;
        // First position past k whose degree drops below k.
        let cut = sorted.partition_point(|&d| d >= k64).max(k);
        let tail = (cut - k) as u64 * k64 + (prefix[n] - prefix[cut]);
        if prefix[k] > k64 * (k64 - 1) + tail {
            return Err(Error::NotGraphical { index: k });
        }
    }
    Ok(())
}

/// Realizes a degree sequence as a simple graph per the spec's mode.
pub fn realize_graph(sequence: &DegreeSequence, spec: &PowerLawSpec) -> Result<Realization> {
    check_graphical(&sequence.degrees)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.realization {
        RealizationMode::HavelHakimiShuffled => {
            let mut edges = havel_hakimi(&sequence.degrees)?;
            let attempts = spec.swap_rounds * edges.len();
            shuffle_edges(&mut edges, attempts, &mut rng);
            let graph = Graph::from_edges(sequence.degrees.len(), &edges)?;
            Ok(Realization { graph, erased_edges: 0 })
        }
        RealizationMode::ConfigurationErased => {
            let mut stubs: Vec<u32> = Vec::new();
            for (v, &d) in sequence.degrees.iter().enumerate() {
                stubs.extend(std::iter::repeat(v as u32).take(d as usize));
            }
            stubs.shuffle(&mut rng);
            let mut seen = HashSet::new();
            let mut edges = Vec::new();
            let mut erased = 0usize;
            for pair in stubs.chunks_exact(2) {
                let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                if u == v || !seen.insert((u, v)) {
                    erased += 1;
                } else {
                    edges.push((u, v));
                }
            }
            let graph = Graph::from_edges(sequence.degrees.len(), &edges)?;
            Ok(Realization { graph, erased_edges: erased })
        }
    }
}

/// Convenience wrapper: degree sequence plus realization.
pub fn generate(spec: &PowerLawSpec) -> Result<Realization> {
    let sequence = degree_sequence(spec.alpha_exp, spec.beta)?;
    realize_graph(&sequence, spec)
}

/// Deterministic Havel-Hakimi: repeatedly connect the highest-degree vertex
/// to the next-highest ones. Within degree ties the rightmost entries are
/// consumed, which keeps the working list sorted without re-sorting.
fn havel_hakimi(degrees: &[u32]) -> Result<Vec<(u32, u32)>> {
    let mut entries: Vec<(u32, u32)> = degrees
        .iter()
        .enumerate()
        .map(|(v, &d)| (d, v as u32))
        .collect();
    entries.sort_unstable_by(|a, b| b.cmp(a));
    let mut edges = Vec::with_capacity(degrees.iter().map(|&d| d as usize).sum::<usize>() / 2);
    let mut start = 0usize;
    while start < entries.len() {
        let (d, v) = entries[start];
        if d == 0 {
            break;
        }
        start += 1;
        let d = d as usize;
        if start + d > entries.len() || entries[start + d - 1].0 == 0 {
            return Err(Error::NotGraphical { index: start });
        }
        let boundary = entries[start + d - 1].0;
        // Positions with degree above the boundary value form a prefix.
        let above = entries[start..start + d]
            .iter()
            .take_while(|e| e.0 > boundary)
            .count();
        let seg_lo = start + above;
        let mut seg_hi = start + d;
        while seg_hi < entries.len() && entries[seg_hi].0 == boundary {
            seg_hi += 1;
        }
        let needed = d - above;
        let chosen: Vec<usize> = (start..seg_lo)
            .chain(seg_hi - needed..seg_hi)
            .collect();
        for p in chosen {
            entries[p].0 -= 1;
            edges.push((v.min(entries[p].1), v.max(entries[p].1)));
        }
    }
    debug_assert!(entries[start..].iter().all(|e| e.0 == 0));
    Ok(edges)
}

/// Degree-preserving randomization: `attempts` double-edge swap proposals,
/// rejecting any that would create a loop or duplicate edge.
fn shuffle_edges<R: Rng>(edges: &mut [(u32, u32)], attempts: usize, rng: &mut R) {
    if edges.len() < 2 {
        return;
    }
    let mut present: HashSet<(u32, u32)> = edges.iter().copied().collect();
    for _ in 0..attempts {
        let i = rng.gen_range(0..edges.len());
        let j = rng.gen_range(0..edges.len());
        if i == j {
            continue;
        }
        let (a, b) = edges[i];
        let (c, d) = edges[j];
        let ((p, q), (r, s)) = if rng.gen_bool(0.5) {
            ((a, c), (b, d))
        } else {
            ((a, d), (b, c))
        };
        if p == q || r == s {
            continue;
        }
        let e1 = (p.min(q), p.max(q));
        let e2 = (r.min(s), r.max(s));
        if e1 == e2 || present.contains(&e1) || present.contains(&e2) {
            continue;
        }
        present.remove(&edges[i]);
        present.remove(&edges[j]);
        present.insert(e1);
        present.insert(e2);
        edges[i] = e1;
        edges[j] = e2;
    }
}

/// Evaluates the closed-form node/edge counts of the model for any
/// `beta > 0`; the growth-rate cases pick the applicable formula.
pub fn theoretical_counts(alpha_exp: f64, beta: f64) -> Result<ModelStats> {
    if !(alpha_exp >= 1.0) || !(beta > 0.0) {
        return Err(Error::Domain(format!(
            "need e^alpha >= 1 and beta > 0, got e^alpha={alpha_exp}, beta={beta}"
        )));
    }
    let alpha = alpha_exp.ln();
    let n_theory = if beta > 1.0 {
        riemann_zeta(beta)? * alpha_exp
    } else if beta == 1.0 {
        alpha * alpha_exp
    } else {
        alpha_exp.powf(1.0 / beta) / (1.0 - beta)
    };
    let m_theory = if beta > 2.0 {
        0.5 * riemann_zeta(beta - 1.0)? * alpha_exp
    } else if beta == 2.0 {
        0.25 * alpha * alpha_exp
    } else {
        0.5 * alpha_exp.powf(2.0 / beta) / (2.0 - beta)
    };
    Ok(ModelStats {
        n_theory,
        m_theory,
        max_degree_theory: alpha_exp.powf(1.0 / beta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn histogram(g: &Graph) -> Vec<u32> {
        let mut h = vec![0u32; g.stats().max_degree + 1];
        for v in 0..g.node_count() as u32 {
            h[g.degree(v)] += 1;
        }
        h
    }

    #[test]
    fn counts_for_beta_2_5() {
        let seq = degree_sequence(1000.0, 2.5).unwrap();
        let ones = seq.degrees.iter().filter(|&&d| d == 1).count();
        let twos = seq.degrees.iter().filter(|&&d| d == 2).count();
        let max = *seq.degrees.iter().max().unwrap();
        // Degree sum parity may bump a single minimum-degree vertex.
        assert!(ones == 1000 || ones == 999, "ones = {ones}");
        assert!(twos == 176 || twos == 177);
        assert_eq!(max, 15);
    }

    #[test]
    fn counts_for_beta_3() {
        let seq = degree_sequence(100.0, 3.0).unwrap();
        let mut by_degree = [0usize; 5];
        for &d in &seq.degrees {
            by_degree[d as usize] += 1;
        }
        if seq.parity_adjusted {
            // One vertex moved from degree 1 to 2.
            assert_eq!(by_degree[1..].to_vec(), vec![99, 13, 3, 1]);
        } else {
            assert_eq!(by_degree[1..].to_vec(), vec![100, 12, 3, 1]);
        }
    }

    #[test]
    fn degenerate_single_vertex_is_not_realizable() {
        let seq = degree_sequence(1.0, 2.5).unwrap();
        assert_eq!(seq.degrees, vec![2]);
        assert!(seq.parity_adjusted);
        let spec = PowerLawSpec::new(1.0, 2.5, 0);
        assert!(matches!(
            realize_graph(&seq, &spec),
            Err(Error::NotGraphical { .. })
        ));
    }

    #[test]
    fn erdos_gallai_flags_star_overflow() {
        // One vertex of degree 3 among two others cannot be realized.
        let err = check_graphical(&[3, 1, 2]).unwrap_err();
        assert!(matches!(err, Error::NotGraphical { index: 1 }));
        assert!(check_graphical(&[2, 2, 2]).is_ok());
        assert!(matches!(check_graphical(&[1, 1, 1]), Err(Error::Domain(_))));
    }

    #[test]
    fn forced_realizations() {
        let spec = PowerLawSpec::new(2.0, 3.0, 7);
        let pair = DegreeSequence { degrees: vec![1, 1], parity_adjusted: false };
        let g = realize_graph(&pair, &spec).unwrap().graph;
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));

        let triangle = DegreeSequence { degrees: vec![2, 2, 2], parity_adjusted: false };
        let g = realize_graph(&triangle, &spec).unwrap().graph;
        assert_eq!((g.node_count(), g.edge_count()), (3, 3));
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2) && g.has_edge(0, 2));
    }

    #[test]
    fn exact_mode_realizes_the_degree_multiset() {
        let spec = PowerLawSpec::new(500.0, 2.5, 123);
        let seq = degree_sequence(spec.alpha_exp, spec.beta).unwrap();
        let realized = realize_graph(&seq, &spec).unwrap();
        assert_eq!(realized.erased_edges, 0);
        let mut hist = histogram(&realized.graph);
        let top = *seq.degrees.iter().max().unwrap() as usize;
        hist.resize(hist.len().max(top + 1), 0);
        let mut target = vec![0u32; hist.len()];
        for &d in &seq.degrees {
            target[d as usize] += 1;
        }
        assert_eq!(hist, target);
    }

    #[test]
    fn both_modes_emit_simple_graphs_deterministically() {
        for mode in [RealizationMode::HavelHakimiShuffled, RealizationMode::ConfigurationErased] {
            let spec = PowerLawSpec {
                realization: mode,
                ..PowerLawSpec::new(300.0, 2.2, 99)
            };
            let a = generate(&spec).unwrap().graph;
            let b = generate(&spec).unwrap().graph;
            assert_eq!(a, b);
            // Simplicity is structural: adjacency holds no duplicates.
            for v in 0..a.node_count() as u32 {
                let nbrs = a.neighbors(v);
                assert!(nbrs.windows(2).all(|w| w[0] < w[1]));
                assert!(!nbrs.contains(&v));
            }
        }
    }

    #[test]
    fn configuration_mode_stays_at_or_below_targets() {
        let spec = PowerLawSpec {
            realization: RealizationMode::ConfigurationErased,
            ..PowerLawSpec::new(400.0, 2.5, 5)
        };
        let seq = degree_sequence(spec.alpha_exp, spec.beta).unwrap();
        let realized = realize_graph(&seq, &spec).unwrap();
        let total: usize = seq.degrees.iter().map(|&d| d as usize).sum();
        assert_eq!(realized.graph.edge_count() + realized.erased_edges, total / 2);
    }

    #[test]
    fn theoretical_counts_per_case() {
        let s = theoretical_counts(10_000.0, 2.5).unwrap();
        assert!((s.n_theory - 13_414.87).abs() < 1.0);
        let s3 = theoretical_counts(10_000.0, 3.0).unwrap();
        assert!((s3.m_theory - 8_224.67).abs() < 0.5);
        let s2 = theoretical_counts(10_000.0, 2.0).unwrap();
        let alpha = 10_000.0f64.ln();
        assert!((s2.m_theory - 0.25 * alpha * 10_000.0).abs() < 1e-6);
        assert!(theoretical_counts(10.0, -1.0).is_err());
    }

    #[test]
    fn realized_node_count_tracks_theory_for_beta_above_2() {
        let seq = degree_sequence(10_000.0, 2.5).unwrap();
        let stats = theoretical_counts(10_000.0, 2.5).unwrap();
        let relative = (seq.degrees.len() as f64 - stats.n_theory).abs() / stats.n_theory;
        assert!(relative <= 0.05, "relative deviation {relative}");
    }
}
