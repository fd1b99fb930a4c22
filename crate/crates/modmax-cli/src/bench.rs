//! The `bench` subcommand: run a manifest of datasets through the detection
//! pipeline and compare against expected modularity values.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use serde::Deserialize;

use modmax::graph::{parse_edge_list, ParseOptions};
use modmax::lp::{build_sparse, complete_row_count};
use modmax::rounding::{detect, RoundingConfig};
use modmax::lp::{SolverLimits, SolverTolerances};

use crate::{Cli, Format};

#[derive(Debug, Deserialize)]
pub struct Manifest {
    pub datasets: Vec<ManifestEntry>,
}

#[derive(Debug, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    /// Edge-list path, relative to the manifest file.
    pub file: String,
    pub expected_modularity: f64,
    pub tolerance: f64,
    #[serde(default)]
    pub max_gap: Option<f64>,
    #[serde(default)]
    pub expected_complete_constraints: Option<u64>,
    #[serde(default)]
    pub source: Option<String>,
    #[serde(default)]
    pub one_indexed: bool,
    /// Optional datasets are skipped, not failed, when the file is absent.
    #[serde(default)]
    pub optional: bool,
    /// Informational rows run and report but never gate the exit code.
    #[serde(default)]
    pub informational: bool,
}

#[derive(Debug, serde::Serialize)]
struct Row {
    name: String,
    status: String,
    n: Option<usize>,
    m: Option<usize>,
    lp_bound: Option<f64>,
    modularity: Option<f64>,
    gap: Option<f64>,
    expected: f64,
    tolerance: f64,
    complete_constraints: Option<u64>,
    sparse_constraints: Option<usize>,
    sparse_bound: Option<usize>,
    source: Option<String>,
    wall_ms: f64,
    detail: String,
}

pub fn run(cli: &Cli, manifest_path: &PathBuf) -> Result<ExitCode, String> {
    let text = fs::read_to_string(manifest_path)
        .map_err(|e| format!("cannot read {}: {e}", manifest_path.display()))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| format!("{}: {e}", manifest_path.display()))?;
    if manifest.datasets.is_empty() {
        return Err("manifest lists no datasets".into());
    }
    let base = manifest_path.parent().unwrap_or(Path::new("."));

    let mut rows = Vec::new();
    let mut gating_failure = false;
    for entry in &manifest.datasets {
        let row = run_entry(cli, base, entry);
        let failed = matches!(row.status.as_str(), "fail" | "error");
        if failed && !entry.informational {
            gating_failure = true;
        }
        rows.push(row);
    }

    let tsv_header =
        "name\tstatus\tn\tm\tlp_bound\tmodularity\tgap\texpected\twall_ms\tdetail";
    let mut tsv = String::from(tsv_header);
    for r in &rows {
        tsv.push('\n');
        tsv.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.1}\t{}",
            r.name,
            r.status,
            opt(r.n),
            opt(r.m),
            opt(r.lp_bound),
            opt(r.modularity),
            opt(r.gap),
            r.expected,
            r.wall_ms,
            r.detail,
        ));
    }
    let json = serde_json::json!({
        "rows": rows,
        "pass": !gating_failure,
    });
    match cli.format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&json).unwrap())
        }
        Format::Tsv => println!("{tsv}"),
    }
    if let Some(path) = &cli.output {
        fs::write(path, serde_json::to_string_pretty(&json).unwrap())
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(if gating_failure { ExitCode::from(3) } else { ExitCode::SUCCESS })
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

fn run_entry(cli: &Cli, base: &Path, entry: &ManifestEntry) -> Row {
    let start = Instant::now();
    let mut row = Row {
        name: entry.name.clone(),
        status: "error".into(),
        n: None,
        m: None,
        lp_bound: None,
        modularity: None,
        gap: None,
        expected: entry.expected_modularity,
        tolerance: entry.tolerance,
        complete_constraints: None,
        sparse_constraints: None,
        sparse_bound: None,
        source: entry.source.clone(),
        wall_ms: 0.0,
        detail: String::new(),
    };
    let path = base.join(&entry.file);
    if !path.exists() {
        row.status = if entry.optional { "skipped".into() } else { "error".into() };
        row.detail = format!("dataset not found: {}", path.display());
        row.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        return row;
    }
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            row.detail = format!("read failed: {e}");
            return row;
        }
    };
    let options = ParseOptions { one_indexed: entry.one_indexed, ..Default::default() };
    let graph = match parse_edge_list(&text, &options) {
        Ok(parsed) => parsed.graph,
        Err(e) => {
            row.detail = format!("parse failed: {e}");
            return row;
        }
    };
    row.n = Some(graph.node_count());
    row.m = Some(graph.edge_count());
    row.complete_constraints = Some(complete_row_count(graph.node_count()) as u64);
    if let Ok(sparse) = build_sparse(&graph, cli.lambda, false) {
        row.sparse_constraints = Some(sparse.constraint_count());
        row.sparse_bound = Some((graph.node_count() - 1) * 2 * graph.edge_count());
    }

    let limits = SolverLimits {
        time_limit: cli.time_limit_sec.map(std::time::Duration::from_secs_f64),
        ..Default::default()
    };
    let report = match detect(
        &graph,
        cli.lambda,
        &RoundingConfig::default(),
        &SolverTolerances::default(),
        &limits,
    ) {
        Ok(r) => r,
        Err(e) => {
            row.detail = format!("detect failed: {e}");
            return row;
        }
    };
    row.lp_bound = report.lp_bound;
    row.modularity = Some(report.modularity);
    row.gap = report.gap;
    row.wall_ms = start.elapsed().as_secs_f64() * 1e3;

    let mut problems = Vec::new();
    if (report.modularity - entry.expected_modularity).abs() > entry.tolerance {
        problems.push(format!(
            "modularity {:.4} not within {} of {}",
            report.modularity, entry.tolerance, entry.expected_modularity
        ));
    }
    if let (Some(max_gap), Some(gap)) = (entry.max_gap, report.gap) {
        if gap > max_gap {
            problems.push(format!("gap {gap:.6} above {max_gap}"));
        }
    }
    if let Some(expected_rows) = entry.expected_complete_constraints {
        let actual = complete_row_count(graph.node_count()) as u64;
        if actual != expected_rows {
            problems.push(format!(
                "complete constraints {actual} != expected {expected_rows}"
            ));
        }
    }
    if report.fallback {
        problems.push("solver fell back to heuristics".into());
    }
    if problems.is_empty() {
        row.status = "pass".into();
    } else {
        row.status = "fail".into();
        row.detail = problems.join("; ");
    }
    row
}
