//! Metric LP/ILP formulations of modularity maximization and the machinery
//! to solve them: a bounded-variable revised simplex baseline, a
//! branch-and-bound wrapper, shortest-path metric completion and triangle
//! audits.

mod metric;
mod model;
mod simplex;
mod solver;

pub use metric::{
    metric_completion, metric_completion_seq, verify_triangle_inequalities,
    verify_triangle_inequalities_seq, TriangleViolation,
};
pub use model::{
    build_complete, build_complete_with_cap, build_sparse, complete_over_capacity,
    complete_row_count, count_lp_format_rows, decode_distances, encode_partition, ConstraintRow,
    FormulationKind, LpProblem, DEFAULT_ROW_CAP,
};
pub use simplex::{BoundedLp, SimplexOptions, SimplexOutcome, SimplexStatus};
pub use solver::{
    solve_ilp, solve_lp, IlpSolution, LpSolution, SolveStatus, SolverLimits, SolverTolerances,
};
