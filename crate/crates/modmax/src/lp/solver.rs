//! LP relaxation solving, integrality certification and small-scale exact
//! solving by branch-and-bound.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use crate::lp::model::{decode_distances, LpProblem};
use crate::lp::simplex::{solve_bounded_lp, BoundedLp, SimplexOptions, SimplexStatus};
use crate::modularity::Partition;
use crate::pairs::PairTable;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    IterationLimit,
    Infeasible,
}

/// Numerical tolerances of the solving layer.
#[derive(Debug, Clone, Copy)]
pub struct SolverTolerances {
    pub feasibility: f64,
    pub optimality: f64,
    /// Distance from `{0, 1}` below which a value counts as integral.
    pub integrality: f64,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        SolverTolerances { feasibility: 1e-7, optimality: 1e-9, integrality: 1e-6 }
    }
}

/// Resource limits of the solving layer.
#[derive(Debug, Clone, Copy)]
pub struct SolverLimits {
    pub lp_iterations: usize,
    pub ilp_nodes: usize,
    pub time_limit: Option<Duration>,
}

impl Default for SolverLimits {
    fn default() -> Self {
        SolverLimits { lp_iterations: 5_000_000, ilp_nodes: 200_000, time_limit: None }
    }
}

/// Solution of an LP relaxation.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub values: PairTable,
    /// Objective on the modularity scale; an upper bound on the maximum
    /// achievable modularity.
    pub objective: f64,
    pub status: SolveStatus,
    /// All values within the integrality tolerance of `{0, 1}`.
    pub integral: bool,
    pub iterations: usize,
}

impl LpSolution {
    /// Dumps pair values as JSON keyed `"i,j"` with `i < j`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut pairs = BTreeMap::new();
        for (i, j) in self.values.pair_index().iter() {
            pairs.insert(format!("{i},{j}"), self.values.get(i, j));
        }
        serde_json::json!({
            "objective": self.objective,
            "status": self.status,
            "integral": self.integral,
            "iterations": self.iterations,
            "values": pairs,
        })
    }
}

/// Solution of an integer solve.
#[derive(Debug, Clone)]
pub struct IlpSolution {
    pub partition: Partition,
    pub objective: f64,
    /// Best upper bound at termination; equals the objective when proven.
    pub bound: f64,
    pub proven_optimal: bool,
    pub nodes_explored: usize,
}

fn to_bounded(problem: &LpProblem) -> BoundedLp {
    BoundedLp {
        var_count: problem.variable_count(),
        objective: problem.objective.clone(),
        rows: problem
            .rows
            .iter()
            .map(|r| {
                (
                    vec![
                        (r.left[0] as u32, 1.0),
                        (r.left[1] as u32, 1.0),
                        (r.right as u32, -1.0),
                    ],
                    0.0,
                )
            })
            .collect(),
    }
}

fn simplex_options(
    tolerances: &SolverTolerances,
    limits: &SolverLimits,
    deadline: Option<Instant>,
) -> SimplexOptions {
    SimplexOptions {
        feasibility_tol: tolerances.feasibility,
        optimality_tol: tolerances.optimality,
        max_iterations: limits.lp_iterations,
        time_limit: deadline.map(|d| d.saturating_duration_since(Instant::now())),
        ..Default::default()
    }
}

fn is_integral(values: &[f64], tol: f64) -> bool {
    values.iter().all(|&v| v <= tol || (1.0 - v).abs() <= tol)
}

/// Solves the LP relaxation of a metric formulation.
///
/// The zero vector is always feasible, so an infeasible outcome indicates an
/// internal inconsistency and is reported as an error.
pub fn solve_lp(
    problem: &LpProblem,
    tolerances: &SolverTolerances,
    limits: &SolverLimits,
) -> Result<LpSolution> {
    if problem.integral {
        return Err(Error::Domain(
            "problem has the integrality flag set; use solve_ilp".into(),
        ));
    }
    let deadline = limits.time_limit.map(|t| Instant::now() + t);
    let outcome = solve_bounded_lp(&to_bounded(problem), &simplex_options(tolerances, limits, deadline));
    let status = match outcome.status {
        SimplexStatus::Optimal => SolveStatus::Optimal,
        SimplexStatus::LimitReached => SolveStatus::IterationLimit,
        SimplexStatus::Infeasible => {
            return Err(Error::Domain(
                "relaxation reported infeasible although d = 0 is feasible".into(),
            ))
        }
    };
    let integral =
        status == SolveStatus::Optimal && is_integral(&outcome.values, tolerances.integrality);
    Ok(LpSolution {
        values: PairTable::from_values(problem.node_count, outcome.values),
        objective: outcome.objective + problem.constant,
        status,
        integral,
        iterations: outcome.iterations,
    })
}

/// Branch-and-bound over the pair variables of an integral formulation.
///
/// Branches on the most fractional variable (ties to the smallest pair
/// index), exploring the `d = 0` (merge) child first. `warm_start`, when
/// given, seeds the incumbent with an encoded partition.
pub fn solve_ilp(
    problem: &LpProblem,
    warm_start: Option<&Partition>,
    tolerances: &SolverTolerances,
    limits: &SolverLimits,
) -> Result<IlpSolution> {
    if !problem.integral {
        return Err(Error::Domain("integrality flag is off; use solve_lp".into()));
    }
    let deadline = limits.time_limit.map(|t| Instant::now() + t);
    let mut search = Search {
        problem,
        tolerances: *tolerances,
        limits: *limits,
        deadline,
        fixed: vec![None; problem.variable_count()],
        incumbent: None,
        incumbent_value: f64::NEG_INFINITY,
        nodes: 0,
        budget_hit: false,
        open_bound: f64::NEG_INFINITY,
    };

    // Trivial integral points seed the incumbent even without a warm start.
    let v = problem.variable_count();
    search.offer(vec![0.0; v]);
    search.offer(vec![1.0; v]);
    if let Some(p) = warm_start {
        search.offer(crate::lp::model::encode_partition(p).into_values());
    }

    // Modularity never exceeds 1, which seeds the root bound.
    search.explore(1.0);

    let incumbent = search
        .incumbent
        .expect("at least the all-zero point is feasible");
    let objective = search.incumbent_value;
    let proven_optimal = !search.budget_hit;
    let bound = if proven_optimal { objective } else { search.open_bound.max(objective) };
    let table = PairTable::from_values(problem.node_count, incumbent);
    let partition = decode_distances(&table, 0.5);
    Ok(IlpSolution {
        partition,
        objective,
        bound,
        proven_optimal,
        nodes_explored: search.nodes,
    })
}

struct Search<'a> {
    problem: &'a LpProblem,
    tolerances: SolverTolerances,
    limits: SolverLimits,
    deadline: Option<Instant>,
    fixed: Vec<Option<bool>>,
    incumbent: Option<Vec<f64>>,
    incumbent_value: f64,
    nodes: usize,
    budget_hit: bool,
    open_bound: f64,
}

enum Reduced {
    Infeasible,
    Lp(BoundedLp, Vec<u32>, f64),
}

impl<'a> Search<'a> {
    /// Offers an integral candidate; keeps it when feasible and better.
    fn offer(&mut self, values: Vec<f64>) {
        debug_assert!(is_integral(&values, 1e-9));
        let feasible = self.problem.rows.iter().all(|r| {
            values[r.left[0]] + values[r.left[1]] - values[r.right] >= -1e-9
        });
        if !feasible {
            return;
        }
        let value = self.problem.objective_value(&values).expect("dimensions match");
        if value > self.incumbent_value + 1e-12 {
            self.incumbent_value = value;
            self.incumbent = Some(values);
        }
    }

    /// Substitutes the current fixings into the problem, dropping satisfied
    /// rows and detecting direct contradictions.
    fn reduce(&self) -> Reduced {
        let mut free: Vec<u32> = Vec::new();
        let mut compact = vec![u32::MAX; self.problem.variable_count()];
        for (j, fix) in self.fixed.iter().enumerate() {
            if fix.is_none() {
                compact[j] = free.len() as u32;
                free.push(j as u32);
            }
        }
        let mut constant = self.problem.constant;
        for (j, fix) in self.fixed.iter().enumerate() {
            if *fix == Some(true) {
                constant += self.problem.objective[j];
            }
        }
        let objective: Vec<f64> =
            free.iter().map(|&j| self.problem.objective[j as usize]).collect();

        let mut rows = Vec::new();
        'rows: for row in &self.problem.rows {
            let mut terms: Vec<(u32, f64)> = Vec::with_capacity(3);
            let mut rhs = 0.0;
            for (var, coef) in [
                (row.left[0], 1.0),
                (row.left[1], 1.0),
                (row.right, -1.0),
            ] {
                match self.fixed[var] {
                    Some(value) => rhs -= coef * if value { 1.0 } else { 0.0 },
                    None => terms.push((compact[var], coef)),
                }
            }
            if terms.is_empty() {
                if rhs > 1e-9 {
                    return Reduced::Infeasible;
                }
                continue 'rows;
            }
            // Row is vacuous if it holds at the worst corner of the box.
            let worst: f64 = terms.iter().map(|&(_, c)| c.min(0.0)).sum();
            if worst >= rhs {
                continue 'rows;
            }
            rows.push((terms, rhs));
        }
        Reduced::Lp(BoundedLp { var_count: free.len(), objective, rows }, free, constant)
    }

    fn out_of_budget(&self) -> bool {
        self.nodes >= self.limits.ilp_nodes
            || self.deadline.is_some_and(|d| Instant::now() > d)
    }

    fn explore(&mut self, parent_bound: f64) {
        if self.out_of_budget() {
            self.budget_hit = true;
            self.open_bound = self.open_bound.max(parent_bound);
            return;
        }
        self.nodes += 1;

        let (lp, free, constant) = match self.reduce() {
            Reduced::Infeasible => return,
            Reduced::Lp(lp, free, constant) => (lp, free, constant),
        };
        if free.is_empty() {
            let values: Vec<f64> = self
                .fixed
                .iter()
                .map(|f| if f.unwrap_or(false) { 1.0 } else { 0.0 })
                .collect();
            self.offer(values);
            return;
        }

        let options = simplex_options(&self.tolerances, &self.limits, self.deadline);
        let outcome = solve_bounded_lp(&lp, &options);
        match outcome.status {
            SimplexStatus::Infeasible => return,
            SimplexStatus::LimitReached => {
                self.budget_hit = true;
                self.open_bound = self.open_bound.max(
                    parent_bound.min(outcome.objective + constant),
                );
                return;
            }
            SimplexStatus::Optimal => {}
        }
        let bound = (outcome.objective + constant).min(parent_bound);
        if bound <= self.incumbent_value + 1e-9 {
            return;
        }

        if is_integral(&outcome.values, self.tolerances.integrality) {
            let mut values: Vec<f64> = self
                .fixed
                .iter()
                .map(|f| if f.unwrap_or(false) { 1.0 } else { 0.0 })
                .collect();
            for (pos, &j) in free.iter().enumerate() {
                values[j as usize] = outcome.values[pos].round();
            }
            self.offer(values);
            return;
        }

        // Most fractional free variable, ties to the smallest pair index.
        let branch = free
            .iter()
            .enumerate()
            .min_by(|(pa, &ja), (pb, &jb)| {
                let fa = (outcome.values[*pa] - 0.5).abs();
                let fb = (outcome.values[*pb] - 0.5).abs();
                fa.partial_cmp(&fb).unwrap().then(ja.cmp(&jb))
            })
            .map(|(_, &j)| j as usize)
            .expect("free set is nonempty");

        for value in [false, true] {
            self.fixed[branch] = Some(value);
            self.explore(bound);
            self.fixed[branch] = None;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::lp::model::{build_complete, build_sparse, encode_partition};
    use crate::modularity::modularity;

    fn tols() -> SolverTolerances {
        SolverTolerances::default()
    }

    fn limits() -> SolverLimits {
        SolverLimits::default()
    }

    fn solve_relaxation(problem: &LpProblem) -> LpSolution {
        solve_lp(problem, &tols(), &limits()).unwrap()
    }

    #[test]
    fn single_edge_lp_keeps_endpoints_together() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let lp = build_sparse(&g, 1.0, false).unwrap();
        let sol = solve_relaxation(&lp);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(sol.objective.abs() < 1e-9);
        assert!(sol.values.get(0, 1).abs() < 1e-7);
        assert!(sol.integral);
    }

    #[test]
    fn k3_lp_optimum_is_zero() {
        // Brute force over the 5 partitions of 3 nodes gives max Q = 0.
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        for lp in [
            build_sparse(&g, 1.0, false).unwrap(),
            build_complete(&g, 1.0, false).unwrap(),
        ] {
            let sol = solve_relaxation(&lp);
            assert_eq!(sol.status, SolveStatus::Optimal);
            assert!(sol.objective.abs() < 1e-9, "objective {}", sol.objective);
        }
    }

    #[test]
    fn two_triangles_lp_and_ilp_find_the_split() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
            .unwrap();
        let lp = build_sparse(&g, 1.0, false).unwrap();
        let sol = solve_relaxation(&lp);
        assert!((sol.objective - 0.5).abs() < 1e-7);

        let ip = build_sparse(&g, 1.0, true).unwrap();
        let exact = solve_ilp(&ip, None, &tols(), &limits()).unwrap();
        assert!(exact.proven_optimal);
        assert!((exact.objective - 0.5).abs() < 1e-9);
        let expect = Partition::from_assignment(&[0, 0, 0, 1, 1, 1]);
        assert_eq!(exact.partition, expect);
        let q = modularity(&g, &exact.partition, 1.0).unwrap().q;
        assert!((q - exact.objective).abs() < 1e-9);
    }

    #[test]
    fn ilp_warm_start_does_not_change_the_answer() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
            .unwrap();
        let ip = build_sparse(&g, 1.0, true).unwrap();
        let warm = Partition::from_assignment(&[0, 0, 0, 1, 1, 1]);
        let a = solve_ilp(&ip, Some(&warm), &tols(), &limits()).unwrap();
        let b = solve_ilp(&ip, None, &tols(), &limits()).unwrap();
        assert_eq!(a.partition, b.partition);
        assert!((a.objective - b.objective).abs() < 1e-12);
    }

    #[test]
    fn node_budget_reports_unproven_with_valid_bound() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
            .unwrap();
        let ip = build_sparse(&g, 1.0, true).unwrap();
        let starved = SolverLimits { ilp_nodes: 0, ..Default::default() };
        let sol = solve_ilp(&ip, None, &tols(), &starved).unwrap();
        assert!(!sol.proven_optimal);
        assert!(sol.bound >= sol.objective - 1e-9);
        assert!(sol.bound <= 1.0);

        let generous = SolverLimits::default();
        let full = solve_ilp(&ip, None, &tols(), &generous).unwrap();
        assert!(full.proven_optimal);
        assert!(full.objective >= sol.objective - 1e-12);
    }

    #[test]
    fn lp_rejects_integral_flag_and_vice_versa() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let ip = build_sparse(&g, 1.0, true).unwrap();
        assert!(solve_lp(&ip, &tols(), &limits()).is_err());
        let lp = build_sparse(&g, 1.0, false).unwrap();
        assert!(solve_ilp(&lp, None, &tols(), &limits()).is_err());
    }

    #[test]
    fn solution_json_shape() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let lp = build_sparse(&g, 1.0, false).unwrap();
        let sol = solve_relaxation(&lp);
        let json = sol.to_json();
        assert!(json["values"].get("0,1").is_some());
        assert!(json["objective"].is_f64());
    }

    #[test]
    fn integral_encode_survives_offer_feasibility_check() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let ip = build_sparse(&g, 1.0, true).unwrap();
        let p = Partition::from_assignment(&[0, 0, 1, 1]);
        let encoded = encode_partition(&p);
        let value = ip.objective_value(encoded.values()).unwrap();
        let sol = solve_ilp(&ip, Some(&p), &tols(), &limits()).unwrap();
        assert!(sol.objective >= value - 1e-12);
    }
}
