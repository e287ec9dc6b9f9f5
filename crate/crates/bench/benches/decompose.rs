use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use iia_bench::even_collections;
use iia_core::graph::{decompose_bfs_peel, decompose_combined, decompose_kirkman, decompose_pigeonhole};
use iia_core::IncidenceGraph;

fn strategies(c: &mut Criterion) {
    let mut group = c.benchmark_group("decompose");
    group.sample_size(20);
    for (name, coll) in even_collections() {
        let g = IncidenceGraph::build(&coll);
        group.bench_with_input(BenchmarkId::new("pigeonhole", &name), &g, |b, g| {
            b.iter(|| decompose_pigeonhole(black_box(g)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("combined", &name), &g, |b, g| {
            b.iter(|| decompose_combined(black_box(g)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("bfs-peel", &name), &g, |b, g| {
            b.iter(|| decompose_bfs_peel(black_box(g)).unwrap())
        });
        if coll.is_all_pairs() {
            group.bench_with_input(BenchmarkId::new("kirkman", &name), &coll, |b, coll| {
                b.iter(|| decompose_kirkman(black_box(coll), 0).unwrap())
            });
        }
    }
    group.finish();
}

fn graph_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("incidence-graph");
    for (name, coll) in even_collections() {
        group.bench_with_input(BenchmarkId::from_parameter(&name), &coll, |b, coll| {
            b.iter(|| IncidenceGraph::build(black_box(coll)).euler_report())
        });
    }
    group.finish();
}

criterion_group!(benches, strategies, graph_build);
criterion_main!(benches);
