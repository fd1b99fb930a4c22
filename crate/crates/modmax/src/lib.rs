//! Community detection by modularity maximization with performance guarantees.
//!
//! The toolkit pairs two complementary approaches:
//!
//! * An LP relaxation of modularity maximization over pairwise distance
//!   variables, built either with the full set of `3·C(n,3)` triangle
//!   inequalities ([`lp::build_complete`]) or with the much smaller *sparse
//!   metric* subset whose middle vertex is a graph neighbor of an endpoint
//!   ([`lp::build_sparse`]). Both formulations share their optima, so the
//!   sparse one is solved, the fractional solution is completed to a
//!   pseudo-metric, rounded by ball growing and refined by Kernighan-Lin
//!   moves ([`rounding::detect`]). The LP optimum upper-bounds the best
//!   achievable modularity, so every report carries an a-posteriori
//!   optimality gap.
//! * The linear-time Following heuristic ([`following::following`]), which
//!   attaches low-degree nodes to a minimum-degree neighbor and carries a
//!   provable constant-factor guarantee `1/(2ζ(β−1))` on power-law graphs
//!   with log-log growth rate `β > 2`. Matching generators for the
//!   `P(α, β)` degree model live in [`powerlaw`].
//!
//! With the `parallel` feature (on by default) the hot kernels — metric
//! completion, triangle audits, Monte-Carlo grouping and the rounding
//! threshold sweep — run on rayon; sequential fallbacks are always compiled
//! and benchmarked against the parallel paths in `benches/parallel.rs`.

pub mod following;
pub mod graph;
pub mod lp;
pub mod modularity;
pub mod pairs;
pub mod powerlaw;
pub mod rounding;
pub mod zeta;

mod error;

pub use error::{Error, Result};
pub use graph::{Graph, GraphStats};
pub use modularity::{ModularityValue, Partition};
pub use rounding::{DetectionReport, RoundingConfig};
