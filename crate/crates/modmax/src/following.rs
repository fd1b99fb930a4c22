//! The Following heuristic: low-degree nodes attach to a minimum-degree
//! neighbor, communities are followee stars. Linear time, with a
//! constant-factor guarantee `1/(2 zeta(beta-1))` on power-law graphs with
//! log-log growth rate `beta > 2`.

use crate::graph::Graph;
use crate::modularity::Partition;
use crate::zeta::riemann_zeta;
use crate::{Error, Result};

/// Output of [`following`]: the star partition plus the follow structure.
#[derive(Debug, Clone)]
pub struct FollowingResult {
    pub partition: Partition,
    /// `followee_of[v]` is `Some(u)` when `v` follows `u`.
    pub followee_of: Vec<Option<u32>>,
    /// Number of followers attached to each node (nonzero only at followees).
    pub follower_counts: Vec<u32>,
    pub degree_cutoff: u32,
}

/// Runs the Following pass with degree cutoff `d0`.
///
/// Unlabeled nodes of degree at most `d0` are processed in non-decreasing
/// degree order (ties by node id) and attach to their minimum-degree
/// non-follower neighbor (ties by node id). Nodes whose neighbors are all
/// followers stay unlabeled and end up followees, possibly as singleton
/// communities.
pub fn following(graph: &Graph, degree_cutoff: u32) -> FollowingResult {
    assert!(degree_cutoff >= 1);
    let n = graph.node_count();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by_key(|&v| (graph.degree(v), v));

    let mut is_follower = vec![false; n];
    let mut is_followee = vec![false; n];
    let mut followee_of: Vec<Option<u32>> = vec![None; n];

    for &v in &order {
        if graph.degree(v) > degree_cutoff as usize {
            break;
        }
        if is_follower[v as usize] || is_followee[v as usize] {
            continue;
        }
        let target = graph
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&u| !is_follower[u as usize])
            .min_by_key(|&u| (graph.degree(u), u));
        if let Some(u) = target {
            is_follower[v as usize] = true;
            followee_of[v as usize] = Some(u);
            is_followee[u as usize] = true;
        }
    }

    let mut follower_counts = vec![0u32; n];
    let mut assignment = vec![0u32; n];
    for v in 0..n as u32 {
        let root = followee_of[v as usize].unwrap_or(v);
        assignment[v as usize] = root;
        if root != v {
            follower_counts[root as usize] += 1;
        }
    }
    FollowingResult {
        partition: Partition::from_assignment(&assignment),
        followee_of,
        follower_counts,
        degree_cutoff,
    }
}

/// The guaranteed fraction of the optimal modularity the Following pass
/// attains on power-law graphs with growth rate `beta > 2`:
/// `1 / (2 zeta(beta - 1))`.
pub fn following_lower_bound(beta: f64) -> Result<f64> {
    if beta <= 2.0 {
        return Err(Error::Domain(format!(
            "the constant-factor bound needs beta > 2, got {beta}"
        )));
    }
    Ok(1.0 / (2.0 * riemann_zeta(beta - 1.0)?))
}

/// The leaf-counting lower bound `n1/(2m) - 8D` on the modularity of
/// `following(graph, 1)`, where `n1` counts degree-1 vertices and
/// `D = sum(d_i^2) / (8 m^2)`. Often vacuously negative outside the
/// power-law regime the guarantee targets.
pub fn leaf_bound_estimate(graph: &Graph) -> f64 {
    let stats = graph.stats();
    let leaves = (0..graph.node_count() as u32)
        .filter(|&v| graph.degree(v) == 1)
        .count() as f64;
    leaves / (2.0 * graph.edge_count() as f64) - 8.0 * stats.degree_concentration
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modularity::modularity;

    fn star() -> Graph {
        // K_{1,4}: center 0.
        Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap()
    }

    fn joined_stars() -> Graph {
        // Centers 0 and 3 joined; two leaves each.
        Graph::from_edges(6, &[(0, 1), (0, 2), (3, 4), (3, 5), (0, 3)]).unwrap()
    }

    #[test]
    fn star_collapses_to_one_community() {
        let result = following(&star(), 1);
        assert_eq!(result.partition.community_count(), 1);
        let q = modularity(&star(), &result.partition, 1.0).unwrap().q;
        assert!(q.abs() < 1e-12);
        assert_eq!(result.follower_counts[0], 4);
    }

    #[test]
    fn joined_stars_split_at_the_bridge() {
        let g = joined_stars();
        let result = following(&g, 1);
        assert_eq!(result.partition.community_count(), 2);
        assert!(result.partition.together(0, 1));
        assert!(result.partition.together(0, 2));
        assert!(result.partition.together(3, 4));
        assert!(!result.partition.together(0, 3));
        let q = modularity(&g, &result.partition, 1.0).unwrap().q;
        assert!((q - 0.3).abs() < 1e-12);
    }

    #[test]
    fn single_edge_becomes_one_community() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let result = following(&g, 1);
        assert_eq!(result.partition.community_count(), 1);
        assert_eq!(result.followee_of[0], Some(1));
        assert_eq!(result.followee_of[1], None);
    }

    #[test]
    fn structural_invariants_hold() {
        let g = Graph::from_edges(
            8,
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 5), (2, 6)],
        )
        .unwrap();
        for d0 in [1u32, 2, 3] {
            let r = following(&g, d0);
            for v in 0..g.node_count() as u32 {
                if let Some(u) = r.followee_of[v as usize] {
                    assert!(g.degree(v) <= d0 as usize);
                    assert!(g.has_edge(v, u));
                    assert!(r.followee_of[u as usize].is_none());
                    assert!(r.partition.together(v, u));
                }
            }
            // Star communities induce connected subgraphs by construction.
            for group in r.partition.communities() {
                let root = group
                    .iter()
                    .copied()
                    .find(|&v| r.followee_of[v as usize].is_none())
                    .expect("every community has its followee");
                for &v in &group {
                    assert!(v == root || g.has_edge(v, root));
                }
            }
        }
    }

    #[test]
    fn lower_bound_values() {
        assert!((following_lower_bound(2.5).unwrap() - 0.19139).abs() < 1e-5);
        let three = following_lower_bound(3.0).unwrap();
        assert!((three - 3.0 / (std::f64::consts::PI * std::f64::consts::PI)).abs() < 1e-9);
        assert!((following_lower_bound(60.0).unwrap() - 0.5).abs() < 1e-6);
        assert!(following_lower_bound(2.0).is_err());
    }

    #[test]
    fn leaf_bound_hand_values() {
        assert!((leaf_bound_estimate(&star()) + 0.75).abs() < 1e-12);
        let g = joined_stars();
        // n1 = 4, m = 5, D = (9 + 9 + 4)/200 = 0.11.
        assert!((leaf_bound_estimate(&g) - (0.4 - 0.88)).abs() < 1e-12);
        let q = modularity(&g, &following(&g, 1).partition, 1.0).unwrap().q;
        assert!(q >= leaf_bound_estimate(&g));
        // No leaves: the bound is negative but valid.
        let k3 = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(leaf_bound_estimate(&k3) < 0.0);
    }
}
