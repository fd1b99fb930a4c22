//! From fractional distances to partitions: threshold ball rounding,
//! Kernighan-Lin single-move refinement, and the end-to-end detection
//! pipeline with its a-posteriori gap report.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::following::following;
use crate::graph::Graph;
use crate::lp::{
    build_sparse, metric_completion, solve_lp, LpSolution, SolveStatus, SolverLimits,
    SolverTolerances,
};
use crate::modularity::{modularity, Partition};
use crate::pairs::PairTable;
use crate::Result;

/// Pivot scan order of the ball-growing rounding.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PivotOrder {
    ByNodeId,
    ByDegreeDesc,
    Random { seed: u64 },
}

/// Configuration of the rounding and refinement stage.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RoundingConfig {
    /// Ball radii to sweep; strictly increasing, within `(0, 1)`.
    pub thresholds: Vec<f64>,
    pub pivot_order: PivotOrder,
    /// Run Kernighan-Lin refinement on the best rounded partition.
    pub refine: bool,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        RoundingConfig {
            thresholds: (1..10).map(|t| t as f64 / 10.0).collect(),
            pivot_order: PivotOrder::ByNodeId,
            refine: true,
        }
    }
}

impl RoundingConfig {
    fn validate(&self) {
        assert!(!self.thresholds.is_empty(), "need at least one threshold");
        assert!(
            self.thresholds.windows(2).all(|w| w[0] < w[1]),
            "thresholds must be strictly increasing"
        );
        assert!(
            self.thresholds.iter().all(|&t| t > 0.0 && t < 1.0),
            "thresholds must lie in (0, 1)"
        );
    }

    fn pivots(&self, graph: &Graph) -> Vec<u32> {
        let mut order: Vec<u32> = (0..graph.node_count() as u32).collect();
        match self.pivot_order {
            PivotOrder::ByNodeId => {}
            PivotOrder::ByDegreeDesc => {
                order.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
            }
            PivotOrder::Random { seed } => {
                order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            }
        }
        order
    }
}

fn grow_balls(distances: &PairTable, pivots: &[u32], threshold: f64) -> Partition {
    let n = distances.node_count();
    let mut assignment = vec![u32::MAX; n];
    let mut next = 0u32;
    for &pivot in pivots {
        if assignment[pivot as usize] != u32::MAX {
            continue;
        }
        assignment[pivot as usize] = next;
        for v in 0..n as u32 {
            if assignment[v as usize] == u32::MAX && distances.get(pivot, v) <= threshold {
                assignment[v as usize] = next;
            }
        }
        next += 1;
    }
    Partition::from_assignment(&assignment)
}

/// Rounds a full pseudo-metric to a partition by growing balls around
/// pivots, sweeping the configured thresholds and keeping the most modular
/// result (ties go to the smallest threshold). Deterministic for a fixed
/// configuration; the input must satisfy the triangle audit (the pipeline
/// completes distances first).
pub fn round_distances(
    graph: &Graph,
    distances: &PairTable,
    config: &RoundingConfig,
    lambda: f64,
) -> Partition {
    config.validate();
    assert_eq!(graph.node_count(), distances.node_count());
    let pivots = config.pivots(graph);
    let score = |t: &f64| {
        let partition = grow_balls(distances, &pivots, *t);
        let q = modularity(graph, &partition, lambda).expect("partition covers graph").q;
        (partition, q)
    };
    let scored: Vec<(Partition, f64)> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            config.thresholds.par_iter().map(score).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            config.thresholds.iter().map(score).collect()
        }
    };
    // Order-preserving collect keeps the argmax schedule-independent.
    let best = scored
        .into_iter()
        .enumerate()
        .max_by(|(ia, (_, qa)), (ib, (_, qb))| {
            qa.partial_cmp(qb).unwrap().then(ib.cmp(ia))
        })
        .expect("threshold list is nonempty");
    best.1 .0
}

/// Outcome of [`kl_refine`].
#[derive(Debug, Clone)]
pub struct KlRefinement {
    pub partition: Partition,
    pub passes: usize,
    pub modularity: f64,
}

const KL_PASS_LIMIT: usize = 100;
const KL_MIN_GAIN: f64 = 1e-9;

/// Kernighan-Lin style refinement: within a pass every node is moved exactly
/// once to its best target community (existing, or a fresh singleton), even
/// at a loss; the best prefix of the pass is kept. Passes repeat until no
/// improvement. Modularity never decreases.
pub fn kl_refine(graph: &Graph, start: &Partition, lambda: f64) -> KlRefinement {
    assert_eq!(graph.node_count(), start.node_count());
    let n = graph.node_count();
    let m = graph.edge_count() as f64;
    let mut assignment: Vec<u32> = start.membership().to_vec();
    let mut q = modularity(graph, start, lambda).expect("partition covers graph").q;
    let mut passes = 0;

    while passes < KL_PASS_LIMIT {
        passes += 1;
        // Degree sums per community, with room for fresh singletons.
        let community_count = assignment.iter().map(|&c| c as usize + 1).max().unwrap();
        let mut degree_sum = vec![0.0f64; community_count + n];
        for v in 0..n as u32 {
            degree_sum[assignment[v as usize] as usize] += graph.degree(v) as f64;
        }
        let mut next_fresh = community_count as u32;
        let mut moved = vec![false; n];
        let mut log: Vec<(u32, u32, u32)> = Vec::with_capacity(n);
        let mut q_after: Vec<f64> = Vec::with_capacity(n);
        let mut running_q = q;
        let mut edges_to: Vec<f64> = vec![0.0; degree_sum.len()];

        for _ in 0..n {
            let mut best: Option<(u32, u32, f64)> = None;
            for v in 0..n as u32 {
                if moved[v as usize] {
                    continue;
                }
                let from = assignment[v as usize];
                let dv = graph.degree(v) as f64;
                let mut touched: Vec<u32> = Vec::new();
                for &u in graph.neighbors(v) {
                    let c = assignment[u as usize];
                    if edges_to[c as usize] == 0.0 {
                        touched.push(c);
                    }
                    edges_to[c as usize] += 1.0;
                }
                let own_edges = edges_to[from as usize];
                // Move gain: (e_to - e_from)/m - (lambda d_v / 2m^2)
                //            (deg_to - deg_from + d_v), deg_from including v.
                let gain = |to_edges: f64, to_degree: f64| {
                    (to_edges - own_edges) / m
                        - lambda * dv * (to_degree - degree_sum[from as usize] + dv)
                            / (2.0 * m * m)
                };
                let mut consider = |target: u32, dq: f64| match best {
                    Some((bv, bt, bq)) => {
                        if dq > bq || (dq == bq && (v, target) < (bv, bt)) {
                            best = Some((v, target, dq));
                        }
                    }
                    None => best = Some((v, target, dq)),
                };
                for &c in &touched {
                    if c != from {
                        consider(c, gain(edges_to[c as usize], degree_sum[c as usize]));
                    }
                }
                // A fresh singleton dominates every other zero-edge target,
                // unless the node already is one.
                if degree_sum[from as usize] > dv {
                    consider(next_fresh, gain(0.0, 0.0));
                }
                for &c in &touched {
                    edges_to[c as usize] = 0.0;
                }
            }
            let Some((v, target, dq)) = best else { break };
            let from = assignment[v as usize];
            let dv = graph.degree(v) as f64;
            degree_sum[from as usize] -= dv;
            degree_sum[target as usize] += dv;
            assignment[v as usize] = target;
            moved[v as usize] = true;
            if target == next_fresh {
                next_fresh += 1;
            }
            running_q += dq;
            log.push((v, from, target));
            q_after.push(running_q);
        }

        // Keep the best prefix of the pass; ties favor fewer moves.
        let mut best_prefix = 0usize;
        let mut best_q = q;
        for (i, &cand) in q_after.iter().enumerate() {
            if cand > best_q + 1e-15 {
                best_q = cand;
                best_prefix = i + 1;
            }
        }
        for &(v, from, _) in log[best_prefix..].iter().rev() {
            assignment[v as usize] = from;
        }
        if best_q <= q + KL_MIN_GAIN {
            break;
        }
        q = best_q;
    }

    let partition = Partition::from_assignment(&assignment);
    let exact = modularity(graph, &partition, lambda).expect("partition covers graph").q;
    KlRefinement { partition, passes, modularity: exact }
}

/// End-to-end result of [`detect`]; serializes with the stable field names
/// the bench harness consumes.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DetectionReport {
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_bound: Option<f64>,
    pub lp_integral: bool,
    pub modularity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    pub membership: Vec<u32>,
    pub timings_ms: BTreeMap<String, f64>,
    pub config: RoundingConfig,
    /// True when solver limits forced the heuristic-only fallback.
    pub fallback: bool,
}

impl DetectionReport {
    pub fn partition(&self) -> Partition {
        Partition::from_assignment(&self.membership)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Full pipeline: sparse formulation, LP relaxation, then either direct
/// decoding (integral optimum, gap provably zero) or metric completion, ball
/// rounding and refinement. When the LP blows its budget the report falls
/// back to the better of Kernighan-Lin from singletons and the Following
/// pass, with no bound.
pub fn detect(
    graph: &Graph,
    lambda: f64,
    config: &RoundingConfig,
    tolerances: &SolverTolerances,
    limits: &SolverLimits,
) -> Result<DetectionReport> {
    config.validate();
    let mut timings = BTreeMap::new();
    let clock = Instant::now();
    let problem = build_sparse(graph, lambda, false)?;
    let mut mark = record(&mut timings, "build", clock, 0.0);

    let solution = solve_lp(&problem, tolerances, limits)?;
    mark = record(&mut timings, "solve_lp", clock, mark);

    if solution.status != SolveStatus::Optimal {
        let (partition, q) = heuristic_fallback(graph, lambda);
        record(&mut timings, "fallback", clock, mark);
        return Ok(DetectionReport {
            n: graph.node_count(),
            m: graph.edge_count(),
            lambda,
            lp_bound: None,
            lp_integral: false,
            modularity: q,
            gap: None,
            membership: partition.membership().to_vec(),
            timings_ms: timings,
            config: config.clone(),
            fallback: true,
        });
    }

    let bound = solution.objective;
    let (partition, integral) = if solution.integral {
        let p = crate::lp::decode_distances(&solution.values, tolerances.integrality);
        record(&mut timings, "decode", clock, mark);
        (p, true)
    } else {
        let full = metric_completion(graph, &solution.values);
        mark = record(&mut timings, "metric_completion", clock, mark);
        let rounded = round_distances(graph, &full, config, lambda);
        mark = record(&mut timings, "round", clock, mark);
        let p = if config.refine {
            let refined = kl_refine(graph, &rounded, lambda);
            record(&mut timings, "refine", clock, mark);
            refined.partition
        } else {
            rounded
        };
        (p, false)
    };
    let q = modularity(graph, &partition, lambda)?.q;
    Ok(DetectionReport {
        n: graph.node_count(),
        m: graph.edge_count(),
        lambda,
        lp_bound: Some(bound),
        lp_integral: integral,
        modularity: q,
        gap: Some(bound - q),
        membership: partition.membership().to_vec(),
        timings_ms: timings,
        config: config.clone(),
        fallback: false,
    })
}

/// Exposed so callers can reuse the LP part of the pipeline.
pub fn solve_sparse_relaxation(
    graph: &Graph,
    lambda: f64,
    tolerances: &SolverTolerances,
    limits: &SolverLimits,
) -> Result<LpSolution> {
    let problem = build_sparse(graph, lambda, false)?;
    solve_lp(&problem, tolerances, limits)
}

fn heuristic_fallback(graph: &Graph, lambda: f64) -> (Partition, f64) {
    let kl = kl_refine(graph, &Partition::singletons(graph.node_count()), lambda);
    let star = following(graph, 1).partition;
    let star_q = modularity(graph, &star, lambda).expect("partition covers graph").q;
    if kl.modularity >= star_q {
        (kl.partition, kl.modularity)
    } else {
        (star, star_q)
    }
}

fn record(timings: &mut BTreeMap<String, f64>, phase: &str, clock: Instant, start: f64) -> f64 {
    let now = clock.elapsed().as_secs_f64() * 1e3;
    timings.insert(phase.to_string(), now - start);
    now
}
