//! Parallel kernels against their sequential fallbacks. Run with the
//! default features for the rayon paths; `--no-default-features` pins the
//! library itself to the sequential implementations.

use std::time::Duration;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use modmax::following::following;
use modmax::graph::Graph;
use modmax::lp::{
    metric_completion, metric_completion_seq, verify_triangle_inequalities,
    verify_triangle_inequalities_seq,
};
use modmax::modularity::monte_carlo_samples_seq;
use modmax::pairs::PairTable;
use modmax::powerlaw::{generate, PowerLawSpec};

fn bench_graph(alpha_exp: f64) -> Graph {
    generate(&PowerLawSpec::new(alpha_exp, 2.5, 42))
        .expect("model realizable")
        .graph
}

fn edge_distances(graph: &Graph, seed: u64) -> PairTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = PairTable::filled(graph.node_count(), 1.0);
    for (i, j) in graph.edges() {
        table.set(i, j, rng.gen_range(0.05..0.95));
    }
    table
}

fn completion(c: &mut Criterion) {
    let graph = bench_graph(1_500.0);
    let distances = edge_distances(&graph, 7);
    let mut group = c.benchmark_group("metric_completion");
    group.sample_size(10).measurement_time(Duration::from_secs(8));
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(metric_completion(&graph, &distances)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(metric_completion_seq(&graph, &distances)))
    });
    group.finish();
}

fn triangle_audit(c: &mut Criterion) {
    let graph = bench_graph(1_500.0);
    let distances = edge_distances(&graph, 11);
    let full = metric_completion_seq(&graph, &distances);
    // Audit a 300-node slice: 4.5M triples is plenty for a benchmark.
    let n = 300.min(full.node_count());
    let mut slice = PairTable::filled(n, 0.0);
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            slice.set(i, j, full.get(i, j));
        }
    }
    let mut group = c.benchmark_group("triangle_audit");
    group.sample_size(10).measurement_time(Duration::from_secs(8));
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(verify_triangle_inequalities(&slice, 1e-6)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(verify_triangle_inequalities_seq(&slice, 1e-6)))
    });
    group.finish();
}

fn grouping_monte_carlo(c: &mut Criterion) {
    let graph = bench_graph(800.0);
    let partition = following(&graph, 1).partition;
    let mut master = ChaCha8Rng::seed_from_u64(3);
    let seeds: Vec<u64> = (0..2_000).map(|_| master.gen()).collect();
    let mut group = c.benchmark_group("grouping_monte_carlo");
    group.sample_size(10).measurement_time(Duration::from_secs(8));
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        use modmax::modularity::{expected_grouping_modularity, GroupingMode};
        b.iter(|| {
            black_box(
                expected_grouping_modularity(
                    &graph,
                    &partition,
                    2,
                    GroupingMode::MonteCarlo { trials: 2_000, seed: 3 },
                )
                .unwrap(),
            )
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(monte_carlo_samples_seq(&graph, &partition, 2, &seeds)))
    });
    group.finish();
}

criterion_group!(benches, completion, triangle_audit, grouping_monte_carlo);
criterion_main!(benches);
