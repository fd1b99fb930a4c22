//! `modmax` — batch interface to the modularity-maximization toolkit.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 solver-limit fallback,
//! 3 benchmark/check failure.

mod bench;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use modmax::graph::{parse_edge_list, Graph, ParseOptions, ParsedGraph};
use modmax::lp::{
    build_sparse, complete_over_capacity, complete_row_count, solve_ilp, solve_lp, SolverLimits,
    SolverTolerances,
};
use modmax::modularity::{
    expected_grouping_modularity, modularity, GroupingMode, Partition,
};
use modmax::rounding::{detect, kl_refine, DetectionReport, PivotOrder, RoundingConfig};
use modmax::{following, powerlaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Parser, Debug)]
#[command(name = "modmax", version, about = "Community detection by modularity maximization")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every randomized choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Resolution scale applied to the null-model term.
    #[arg(long, global = true, default_value_t = 1.0)]
    lambda: f64,

    /// Write the primary report here as well as to stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Wall-clock budget for solver phases, in seconds.
    #[arg(long, global = true)]
    time_limit_sec: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// LP relaxation, rounding and refinement with an optimality gap.
    Detect {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        one_indexed: bool,
        /// Optimality tolerance of the LP solver.
        #[arg(long, default_value_t = 1e-9)]
        lp_tol: f64,
        #[arg(long, default_value_t = 5_000_000)]
        lp_iteration_limit: usize,
        /// Skip the Kernighan-Lin refinement stage.
        #[arg(long)]
        no_refine: bool,
        /// Pivot order of the ball rounding.
        #[arg(long, value_enum, default_value_t = PivotChoice::NodeId)]
        pivot: PivotChoice,
    },
    /// Exact optimum by branch-and-bound on the sparse formulation.
    Exact {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        one_indexed: bool,
        #[arg(long, default_value_t = 200_000)]
        ilp_node_limit: usize,
        /// Solve the complete formulation instead of the sparse one.
        #[arg(long)]
        complete: bool,
    },
    /// The linear-time Following heuristic.
    Follow {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        one_indexed: bool,
        /// Degree cutoff: nodes of at most this degree become followers.
        #[arg(long, default_value_t = 1)]
        d0: u32,
    },
    /// Degree statistics of an edge list.
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        one_indexed: bool,
    },
    /// Build both formulations, compare sizes and (when affordable) optima.
    LpCompare {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        one_indexed: bool,
        /// Export the sparse formulation in LP text format.
        #[arg(long)]
        export_lp: Option<PathBuf>,
        /// Export the complete formulation in LP text format.
        #[arg(long)]
        export_complete_lp: Option<PathBuf>,
    },
    /// Generate a power-law graph from the degree model.
    Generate {
        /// e^alpha: the target count of degree-1 vertices.
        #[arg(long)]
        alpha_exp: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = ModeChoice::Hh)]
        mode: ModeChoice,
        #[arg(long, default_value_t = 10)]
        swap_rounds: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a manifest of datasets with expected results.
    Bench {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Check the random-grouping expectation against (1 - 1/k) Q.
    LemmaCheck {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        one_indexed: bool,
        /// JSON membership array (or an object with a "membership" field).
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        k: usize,
        /// Monte-Carlo trials when exhaustive enumeration is too large.
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PivotChoice {
    NodeId,
    DegreeDesc,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeChoice {
    Hh,
    Config,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn load_graph(path: &PathBuf, one_indexed: bool) -> Result<ParsedGraph, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let options = ParseOptions { one_indexed, ..Default::default() };
    let parsed = parse_edge_list(&text, &options)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    if parsed.duplicate_edges > 0 {
        eprintln!(
            "warning: collapsed {} duplicate edge(s) in {}",
            parsed.duplicate_edges,
            path.display()
        );
    }
    if parsed.dropped_isolated > 0 {
        eprintln!(
            "warning: dropped {} isolated vertex(es) in {}",
            parsed.dropped_isolated,
            path.display()
        );
    }
    Ok(parsed)
}

fn limits(cli_time: Option<f64>, lp_iterations: usize, ilp_nodes: usize) -> SolverLimits {
    SolverLimits {
        lp_iterations,
        ilp_nodes,
        time_limit: cli_time.map(Duration::from_secs_f64),
    }
}

fn emit(cli: &Cli, json: &serde_json::Value, tsv: String) -> Result<(), String> {
    let body = match cli.format {
        Format::Json => serde_json::to_string_pretty(json).expect("serializable report"),
        Format::Tsv => tsv,
    };
    println!("{body}");
    if let Some(path) = &cli.output {
        fs::write(path, format!("{body}\n"))
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn flat_tsv(json: &serde_json::Value) -> String {
    let obj = json.as_object().expect("flat report object");
    let keys: Vec<&String> = obj.keys().collect();
    let header = keys.iter().map(|k| k.as_str()).collect::<Vec<_>>().join("\t");
    let values = keys
        .iter()
        .map(|k| {
            let v = &obj[k.as_str()];
            if v.is_string() {
                v.as_str().unwrap().to_string()
            } else {
                v.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\t");
    format!("{header}\n{values}")
}

fn detect_report(
    cli: &Cli,
    input: &PathBuf,
    one_indexed: bool,
    lp_tol: f64,
    lp_iteration_limit: usize,
    no_refine: bool,
    pivot: PivotChoice,
) -> Result<(DetectionReport, Graph), String> {
    let graph = load_graph(input, one_indexed)?.graph;
    let config = RoundingConfig {
        pivot_order: match pivot {
            PivotChoice::NodeId => PivotOrder::ByNodeId,
            PivotChoice::DegreeDesc => PivotOrder::ByDegreeDesc,
            PivotChoice::Random => PivotOrder::Random { seed: cli.seed },
        },
        refine: !no_refine,
        ..Default::default()
    };
    let tolerances = SolverTolerances { optimality: lp_tol, ..Default::default() };
    let limits = limits(cli.time_limit_sec, lp_iteration_limit, 0);
    let report = detect(&graph, cli.lambda, &config, &tolerances, &limits)
        .map_err(|e| e.to_string())?;
    Ok((report, graph))
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match &cli.command {
        Command::Detect {
            input,
            one_indexed,
            lp_tol,
            lp_iteration_limit,
            no_refine,
            pivot,
        } => {
            let (report, _) = detect_report(
                &cli,
                input,
                *one_indexed,
                *lp_tol,
                *lp_iteration_limit,
                *no_refine,
                *pivot,
            )?;
            let json = serde_json::to_value(&report).expect("serializable report");
            let tsv = flat_tsv(&serde_json::json!({
                "n": report.n,
                "m": report.m,
                "lambda": report.lambda,
                "lp_bound": report.lp_bound,
                "lp_integral": report.lp_integral,
                "modularity": report.modularity,
                "gap": report.gap,
                "communities": report.partition().community_count(),
                "fallback": report.fallback,
            }));
            emit(&cli, &json, tsv)?;
            Ok(if report.fallback { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }

        Command::Exact { input, one_indexed, ilp_node_limit, complete } => {
            let graph = load_graph(input, *one_indexed)?.graph;
            let problem = if *complete {
                modmax::lp::build_complete(&graph, cli.lambda, true)
                    .map_err(|e| e.to_string())?
            } else {
                build_sparse(&graph, cli.lambda, true).map_err(|e| e.to_string())?
            };
            let warm = kl_refine(
                &graph,
                &Partition::singletons(graph.node_count()),
                cli.lambda,
            );
            let limits = limits(cli.time_limit_sec, 5_000_000, *ilp_node_limit);
            let solution = solve_ilp(
                &problem,
                Some(&warm.partition),
                &SolverTolerances::default(),
                &limits,
            )
            .map_err(|e| e.to_string())?;
            let json = serde_json::json!({
                "n": graph.node_count(),
                "m": graph.edge_count(),
                "lambda": cli.lambda,
                "objective": solution.objective,
                "bound": solution.bound,
                "proven_optimal": solution.proven_optimal,
                "nodes_explored": solution.nodes_explored,
                "communities": solution.partition.community_count(),
                "membership": solution.partition.membership(),
            });
            let tsv = flat_tsv(&serde_json::json!({
                "n": graph.node_count(),
                "m": graph.edge_count(),
                "objective": solution.objective,
                "bound": solution.bound,
                "proven_optimal": solution.proven_optimal,
                "nodes_explored": solution.nodes_explored,
            }));
            emit(&cli, &json, tsv)?;
            Ok(if solution.proven_optimal { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }

        Command::Follow { input, one_indexed, d0 } => {
            let graph = load_graph(input, *one_indexed)?.graph;
            let result = following::following(&graph, *d0);
            let q = modularity(&graph, &result.partition, cli.lambda)
                .map_err(|e| e.to_string())?;
            let json = serde_json::json!({
                "n": graph.node_count(),
                "m": graph.edge_count(),
                "lambda": cli.lambda,
                "d0": d0,
                "modularity": q.q,
                "communities": result.partition.community_count(),
                "leaf_bound": following::leaf_bound_estimate(&graph),
                "membership": result.partition.membership(),
            });
            let tsv = flat_tsv(&serde_json::json!({
                "n": graph.node_count(),
                "m": graph.edge_count(),
                "d0": d0,
                "modularity": q.q,
                "communities": result.partition.community_count(),
            }));
            emit(&cli, &json, tsv)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Stats { input, one_indexed } => {
            let parsed = load_graph(input, *one_indexed)?;
            let stats = parsed.graph.stats();
            let json = serde_json::json!({
                "n": stats.node_count,
                "m": stats.edge_count,
                "degree_sum": stats.degree_sum,
                "degree_square_sum": stats.degree_square_sum,
                "max_degree": stats.max_degree,
                "degree_concentration": stats.degree_concentration,
                "duplicate_edges": parsed.duplicate_edges,
                "dropped_isolated": parsed.dropped_isolated,
            });
            let tsv = flat_tsv(&json);
            emit(&cli, &json, tsv)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::LpCompare { input, one_indexed, export_lp, export_complete_lp } => {
            let graph = load_graph(input, *one_indexed)?.graph;
            let tolerances = SolverTolerances::default();
            let solver_limits = limits(cli.time_limit_sec, 5_000_000, 0);

            let sparse = build_sparse(&graph, cli.lambda, false).map_err(|e| e.to_string())?;
            if let Some(path) = export_lp {
                fs::write(path, sparse.to_lp_format())
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            }
            let sparse_sol =
                solve_lp(&sparse, &tolerances, &solver_limits).map_err(|e| e.to_string())?;

            let complete_rows = complete_row_count(graph.node_count());
            let over_capacity = complete_over_capacity(graph.node_count());
            let (complete_obj, complete_built) = if over_capacity {
                (None, None)
            } else {
                let complete = modmax::lp::build_complete(&graph, cli.lambda, false)
                    .map_err(|e| e.to_string())?;
                if let Some(path) = export_complete_lp {
                    fs::write(path, complete.to_lp_format())
                        .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
                }
                let sol = solve_lp(&complete, &tolerances, &solver_limits)
                    .map_err(|e| e.to_string())?;
                (Some(sol.objective), Some(complete.constraint_count()))
            };

            let equal = complete_obj
                .map(|c| (c - sparse_sol.objective).abs() <= 1e-6);
            let sparse_bound = (graph.node_count() - 1) * 2 * graph.edge_count();
            let json = serde_json::json!({
                "n": graph.node_count(),
                "m": graph.edge_count(),
                "lambda": cli.lambda,
                "complete_constraints": complete_rows,
                "complete_built": complete_built,
                "complete_skipped_over_capacity": over_capacity,
                "sparse_constraints": sparse.constraint_count(),
                "sparse_constraint_bound": sparse_bound,
                "complete_objective": complete_obj,
                "sparse_objective": sparse_sol.objective,
                "sparse_integral": sparse_sol.integral,
                "equal_within_tol": equal,
            });
            let tsv = flat_tsv(&json);
            emit(&cli, &json, tsv)?;
            match equal {
                Some(false) => Ok(ExitCode::from(3)),
                _ => Ok(ExitCode::SUCCESS),
            }
        }

        Command::Generate { alpha_exp, beta, mode, swap_rounds, out } => {
            let spec = powerlaw::PowerLawSpec {
                alpha_exp: *alpha_exp,
                beta: *beta,
                seed: cli.seed,
                realization: match mode {
                    ModeChoice::Hh => powerlaw::RealizationMode::HavelHakimiShuffled,
                    ModeChoice::Config => powerlaw::RealizationMode::ConfigurationErased,
                },
                swap_rounds: *swap_rounds,
            };
            let sequence = powerlaw::degree_sequence(spec.alpha_exp, spec.beta)
                .map_err(|e| e.to_string())?;
            let realized = powerlaw::realize_graph(&sequence, &spec)
                .map_err(|e| e.to_string())?;
            let theory = powerlaw::theoretical_counts(spec.alpha_exp, spec.beta)
                .map_err(|e| e.to_string())?;
            fs::write(out, realized.graph.to_edge_list())
                .map_err(|e| format!("cannot write {}: {e}", out.display()))?;
            let stats = realized.graph.stats();
            let sidecar = serde_json::json!({
                "spec": spec,
                "model": theory,
                "realized": {
                    "n": stats.node_count,
                    "m": stats.edge_count,
                    "max_degree": stats.max_degree,
                    "degree_square_sum": stats.degree_square_sum,
                    "parity_adjusted": sequence.parity_adjusted,
                    "erased_edges": realized.erased_edges,
                },
            });
            let sidecar_path = out.with_extension("json");
            fs::write(&sidecar_path, serde_json::to_string_pretty(&sidecar).unwrap())
                .map_err(|e| format!("cannot write {}: {e}", sidecar_path.display()))?;
            emit(&cli, &sidecar, flat_tsv(&serde_json::json!({
                "n": stats.node_count,
                "m": stats.edge_count,
                "max_degree": stats.max_degree,
                "out": out.display().to_string(),
            })))?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Bench { manifest } => bench::run(&cli, manifest),

        Command::LemmaCheck { input, one_indexed, partition, k, trials } => {
            let graph = load_graph(input, *one_indexed)?.graph;
            let membership = read_membership(partition)?;
            if membership.len() != graph.node_count() {
                return Err(format!(
                    "partition covers {} nodes, graph has {}",
                    membership.len(),
                    graph.node_count()
                ));
            }
            let p = Partition::from_assignment(&membership);
            let q = modularity(&graph, &p, 1.0).map_err(|e| e.to_string())?.q;
            let expected = (1.0 - 1.0 / *k as f64) * q;
            let exhaustive_size =
                (*k as u128).checked_pow(p.community_count() as u32);
            let use_exhaustive = exhaustive_size.is_some_and(|s| s <= 1_000_000);
            let mode = if use_exhaustive {
                GroupingMode::Exhaustive
            } else {
                GroupingMode::MonteCarlo { trials: *trials, seed: cli.seed }
            };
            let estimate = expected_grouping_modularity(&graph, &p, *k, mode)
                .map_err(|e| e.to_string())?;
            let pass = if use_exhaustive {
                (estimate.mean - expected).abs() <= 1e-9
            } else {
                (estimate.mean - expected).abs() <= 3.0 * estimate.std_error
            };
            let json = serde_json::json!({
                "k": k,
                "q": q,
                "communities": p.community_count(),
                "mode": if use_exhaustive { "exhaustive" } else { "monte_carlo" },
                "mean": estimate.mean,
                "std_error": estimate.std_error,
                "expected": expected,
                "pass": pass,
            });
            let tsv = flat_tsv(&json);
            emit(&cli, &json, tsv)?;
            Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
    }
}

fn read_membership(path: &PathBuf) -> Result<Vec<u32>, String> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let array = value
        .as_array()
        .or_else(|| value.get("membership").and_then(|m| m.as_array()))
        .ok_or_else(|| {
            format!("{}: expected a JSON membership array", path.display())
        })?;
    array
        .iter()
        .map(|v| {
            v.as_u64()
                .map(|x| x as u32)
                .ok_or_else(|| format!("{}: non-integer community id", path.display()))
        })
        .collect()
}
