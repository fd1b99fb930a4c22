//! Baseline LP solver for box-bounded maximization with `>=` rows:
//!
//! ```text
//!   maximize c·x   subject to   A x >= b,   0 <= x <= 1
//! ```
//!
//! The metric formulations have far more rows than variables, so the primal
//! basis would be row-sized. Instead we run a revised primal simplex on the
//! dual
//!
//! ```text
//!   minimize -b·y1 + 1·y2   subject to   -A' y1 + y2 - s = c,   y1, y2, s >= 0
//! ```
//!
//! whose basis is only `var_count` wide and which is feasible at
//! `y1 = 0, y2 = max(c, 0), s = max(-c, 0)` for every input, so no phase-1 is
//! needed. At optimality the simplex multipliers are exactly the primal
//! variable values, and an early-stopped run still yields a valid upper
//! bound on the primal optimum (any dual-feasible point does). An unbounded
//! dual marks the primal infeasible, which for triangle systems only happens
//! under branch-and-bound fixings.
//!
//! Pricing is plain most-negative reduced cost with a Bland's-rule fallback
//! that engages after long degenerate stretches, plus periodic
//! refactorization of the basis inverse.

use std::time::{Duration, Instant};

/// `maximize c·x` with sparse `>=` rows and every variable in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct BoundedLp {
    pub var_count: usize,
    pub objective: Vec<f64>,
    /// Rows as `(sparse terms, rhs)` meaning `sum coef * x >= rhs`.
    pub rows: Vec<(Vec<(u32, f64)>, f64)>,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Pivot magnitude floor and ratio-test guard.
    pub feasibility_tol: f64,
    /// Reduced-cost threshold for optimality.
    pub optimality_tol: f64,
    pub max_iterations: usize,
    pub time_limit: Option<Duration>,
    /// Rebuild the basis inverse from scratch this often.
    pub refactor_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feasibility_tol: 1e-7,
            optimality_tol: 1e-9,
            max_iterations: 5_000_000,
            time_limit: None,
            refactor_every: 1024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimplexStatus {
    Optimal,
    /// Iteration or wall-time budget exhausted; `objective` is still a valid
    /// upper bound on the primal optimum.
    LimitReached,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub status: SimplexStatus,
    /// Primal values, clamped into `[0, 1]`; meaningful when `Optimal`.
    pub values: Vec<f64>,
    /// `c·values` when optimal, otherwise the dual bound reached so far.
    pub objective: f64,
    pub iterations: usize,
}

/// Column layout of the dual system: first the `R` row-multipliers, then the
/// `V` upper-bound multipliers, then the `V` surplus columns.
struct Columns<'a> {
    rows: &'a [(Vec<(u32, f64)>, f64)],
    var_count: usize,
}

impl<'a> Columns<'a> {
    fn count(&self) -> usize {
        self.rows.len() + 2 * self.var_count
    }

    fn cost(&self, q: usize) -> f64 {
        let r = self.rows.len();
        if q < r {
            -self.rows[q].1
        } else if q < r + self.var_count {
            1.0
        } else {
            0.0
        }
    }

    /// Applies `f(dual_row, coefficient)` to the nonzeros of column `q`.
    fn for_each_entry(&self, q: usize, mut f: impl FnMut(usize, f64)) {
        let r = self.rows.len();
        if q < r {
            for &(var, coef) in &self.rows[q].0 {
                f(var as usize, -coef);
            }
        } else if q < r + self.var_count {
            f(q - r, 1.0);
        } else {
            f(q - r - self.var_count, -1.0);
        }
    }

    fn dot_pi(&self, q: usize, pi: &[f64]) -> f64 {
        let mut acc = 0.0;
        self.for_each_entry(q, |row, coef| acc += pi[row] * coef);
        acc
    }
}

pub fn solve_bounded_lp(problem: &BoundedLp, options: &SimplexOptions) -> SimplexOutcome {
    Solver::new(problem, *options).run()
}

struct Solver<'a> {
    columns: Columns<'a>,
    /// Dual system right-hand side = primal objective.
    rhs: &'a [f64],
    options: SimplexOptions,
    v: usize,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    /// Dense row-major inverse of the basis matrix.
    binv: Vec<f64>,
    basic_values: Vec<f64>,
    pi: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    degenerate_streak: usize,
    bland: bool,
    started: Instant,
}

impl<'a> Solver<'a> {
    fn new(problem: &'a BoundedLp, options: SimplexOptions) -> Solver<'a> {
        let v = problem.var_count;
        let columns = Columns { rows: &problem.rows, var_count: v };
        let r = problem.rows.len();
        let mut basis = Vec::with_capacity(v);
        let mut in_basis = vec![false; columns.count()];
        let mut binv = vec![0.0; v * v];
        let mut basic_values = Vec::with_capacity(v);
        for j in 0..v {
            let c = problem.objective[j];
            let col = if c >= 0.0 { r + j } else { r + v + j };
            basis.push(col);
            in_basis[col] = true;
            binv[j * v + j] = if c >= 0.0 { 1.0 } else { -1.0 };
            basic_values.push(c.abs());
        }
        Solver {
            columns,
            rhs: &problem.objective,
            options,
            v,
            basis,
            in_basis,
            binv,
            basic_values,
            pi: vec![0.0; v],
            iterations: 0,
            since_refactor: 0,
            degenerate_streak: 0,
            bland: false,
            started: Instant::now(),
        }
    }

    fn compute_pi(&mut self) {
        let v = self.v;
        self.pi.iter_mut().for_each(|x| *x = 0.0);
        for (p, &col) in self.basis.iter().enumerate() {
            let g = self.columns.cost(col);
            if g != 0.0 {
                let row = &self.binv[p * v..(p + 1) * v];
                for t in 0..v {
                    self.pi[t] += g * row[t];
                }
            }
        }
    }

    /// Most negative reduced cost (or first negative under Bland's rule).
    fn price(&self) -> Option<usize> {
        let tol = self.options.optimality_tol;
        let mut best: Option<(usize, f64)> = None;
        for q in 0..self.columns.count() {
            if self.in_basis[q] {
                continue;
            }
            let reduced = self.columns.cost(q) - self.columns.dot_pi(q, &self.pi);
            if reduced < -tol {
                if self.bland {
                    return Some(q);
                }
                match best {
                    Some((_, r)) if r <= reduced => {}
                    _ => best = Some((q, reduced)),
                }
            }
        }
        best.map(|(q, _)| q)
    }

    fn direction(&self, q: usize) -> Vec<f64> {
        let v = self.v;
        let mut w = vec![0.0; v];
        self.columns.for_each_entry(q, |row, coef| {
            for p in 0..v {
                w[p] += self.binv[p * v + row] * coef;
            }
        });
        w
    }

    /// Ratio test; `None` means the dual is unbounded (primal infeasible).
    fn leaving(&self, w: &[f64]) -> Option<usize> {
        let tol = self.options.feasibility_tol;
        let mut best: Option<(usize, f64)> = None;
        for (p, &wp) in w.iter().enumerate() {
            if wp <= tol {
                continue;
            }
            let ratio = self.basic_values[p].max(0.0) / wp;
            match best {
                None => best = Some((p, ratio)),
                Some((bp, br)) => {
                    if ratio < br - 1e-12 {
                        best = Some((p, ratio));
                    } else if ratio < br + 1e-12 {
                        // Tie: prefer the larger pivot for stability, or the
                        // smallest basis column under Bland's rule.
                        let better = if self.bland {
                            self.basis[p] < self.basis[bp]
                        } else {
                            wp.abs() > w[bp].abs()
                        };
                        if better {
                            best = Some((p, ratio.min(br)));
                        }
                    }
                }
            }
        }
        best.map(|(p, _)| p)
    }

    fn pivot(&mut self, entering: usize, leaving: usize, w: &[f64]) {
        let v = self.v;
        let theta = self.basic_values[leaving].max(0.0) / w[leaving];
        for p in 0..v {
            if p != leaving {
                let next = self.basic_values[p] - theta * w[p];
                // Clip the dust degenerate steps leave behind.
                self.basic_values[p] = if next.abs() < 1e-13 { 0.0 } else { next };
            }
        }
        self.basic_values[leaving] = theta;

        let pivot = w[leaving];
        let (head, tail) = self.binv.split_at_mut(leaving * v);
        let (prow, rest) = tail.split_at_mut(v);
        for x in prow.iter_mut() {
            *x /= pivot;
        }
        for (p, chunk) in head.chunks_exact_mut(v).enumerate() {
            let factor = w[p];
            if factor != 0.0 {
                for (x, &pr) in chunk.iter_mut().zip(prow.iter()) {
                    *x -= factor * pr;
                }
            }
        }
        for (offset, chunk) in rest.chunks_exact_mut(v).enumerate() {
            let factor = w[leaving + 1 + offset];
            if factor != 0.0 {
                for (x, &pr) in chunk.iter_mut().zip(prow.iter()) {
                    *x -= factor * pr;
                }
            }
        }

        let old = self.basis[leaving];
        self.in_basis[old] = false;
        self.in_basis[entering] = true;
        self.basis[leaving] = entering;

        if theta <= 1e-12 {
            self.degenerate_streak += 1;
            if self.degenerate_streak > 1000 {
                self.bland = true;
            }
        } else {
            self.degenerate_streak = 0;
            self.bland = false;
        }
    }

    /// Rebuilds the inverse and basic values from scratch (Gauss-Jordan with
    /// partial pivoting on the basis columns).
    fn refactor(&mut self) -> bool {
        let v = self.v;
        let mut mat = vec![0.0; v * v];
        for (p, &col) in self.basis.iter().enumerate() {
            self.columns.for_each_entry(col, |row, coef| {
                mat[row * v + p] = coef;
            });
        }
        let mut inv = vec![0.0; v * v];
        for j in 0..v {
            inv[j * v + j] = 1.0;
        }
        for col in 0..v {
            let mut pivot_row = col;
            let mut pivot_val = mat[col * v + col].abs();
            for r in col + 1..v {
                let cand = mat[r * v + col].abs();
                if cand > pivot_val {
                    pivot_val = cand;
                    pivot_row = r;
                }
            }
            if pivot_val < 1e-12 {
                return false;
            }
            if pivot_row != col {
                for k in 0..v {
                    mat.swap(pivot_row * v + k, col * v + k);
                    inv.swap(pivot_row * v + k, col * v + k);
                }
            }
            let diag = mat[col * v + col];
            for k in 0..v {
                mat[col * v + k] /= diag;
                inv[col * v + k] /= diag;
            }
            for r in 0..v {
                if r == col {
                    continue;
                }
                let factor = mat[r * v + col];
                if factor != 0.0 {
                    for k in 0..v {
                        mat[r * v + k] -= factor * mat[col * v + k];
                        inv[r * v + k] -= factor * inv[col * v + k];
                    }
                }
            }
        }
        self.binv = inv;
        for p in 0..v {
            let mut acc = 0.0;
            for t in 0..v {
                acc += self.binv[p * v + t] * self.rhs[t];
            }
            self.basic_values[p] = acc.max(0.0);
        }
        self.since_refactor = 0;
        true
    }

    fn dual_objective(&self) -> f64 {
        self.basis
            .iter()
            .zip(&self.basic_values)
            .map(|(&col, &val)| self.columns.cost(col) * val)
            .sum()
    }

    fn outcome(&mut self, status: SimplexStatus) -> SimplexOutcome {
        self.compute_pi();
        let values: Vec<f64> = self.pi.iter().map(|&x| x.clamp(0.0, 1.0)).collect();
        let objective = match status {
            SimplexStatus::Optimal => {
                values.iter().zip(self.rhs).map(|(x, c)| x * c).sum()
            }
            _ => self.dual_objective(),
        };
        SimplexOutcome { status, values, objective, iterations: self.iterations }
    }

    fn run(mut self) -> SimplexOutcome {
        loop {
            if self.iterations >= self.options.max_iterations {
                return self.outcome(SimplexStatus::LimitReached);
            }
            if self.iterations % 256 == 0 {
                if let Some(limit) = self.options.time_limit {
                    if self.started.elapsed() > limit {
                        return self.outcome(SimplexStatus::LimitReached);
                    }
                }
            }

            self.compute_pi();
            match self.price() {
                None => {
                    // Confirm on a freshly factorized basis before declaring
                    // optimality, unless it already is fresh.
                    if self.since_refactor == 0 {
                        return self.outcome(SimplexStatus::Optimal);
                    }
                    if !self.refactor() {
                        return self.outcome(SimplexStatus::LimitReached);
                    }
                    continue;
                }
                Some(entering) => {
                    let w = self.direction(entering);
                    match self.leaving(&w) {
                        None => return self.outcome(SimplexStatus::Infeasible),
                        Some(leaving) => {
                            self.pivot(entering, leaving, &w);
                            self.iterations += 1;
                            self.since_refactor += 1;
                            if self.since_refactor >= self.options.refactor_every
                                && !self.refactor()
                            {
                                return self.outcome(SimplexStatus::LimitReached);
                            }
                        }
                    }
                }
            }
        }
    }
}
