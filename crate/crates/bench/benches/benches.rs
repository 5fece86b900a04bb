//! Microbenchmarks for the hot paths: the ball solver, core-set
//! refinement, a full consensus run, and topology sampling.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use ccsim::datagen::standard_normal;
use coreset_consensus::{
    coreset_refine, is_strongly_connected, run_consensus, solve_meb, ActivityProcess,
    ConsensusConfig, CoreSet, GraphProcess, PointId, PointSpace, SolverConfig,
};

fn cloud(n: usize, d: usize, seed: u64) -> PointSpace {
    PointSpace::explicit(standard_normal(n, d, seed))
        .unwrap()
        .with_cached_gram()
}

fn bench_solve_meb(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_meb");
    group.sample_size(20);
    let config = SolverConfig::default();
    for (n, d) in [(50, 5), (200, 20), (1000, 50)] {
        let space = cloud(n, d, n as u64);
        let ids: Vec<PointId> = space.ids().collect();
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("n{n}_d{d}")),
            &space,
            |b, space| b.iter(|| solve_meb(black_box(space), &ids, &config).unwrap()),
        );
    }
    group.finish();
}

fn bench_coreset_refine(c: &mut Criterion) {
    let mut group = c.benchmark_group("coreset_refine");
    group.sample_size(20);
    let config = SolverConfig::default();
    for (n, m) in [(60, 2), (60, 10), (200, 10)] {
        let space = cloud(n, 5, 7 + n as u64);
        let ids: Vec<PointId> = space.ids().collect();
        let init = CoreSet::new(&space, vec![ids[0]; m], &config).unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("n{n}_m{m}")),
            &space,
            |b, space| b.iter(|| coreset_refine(black_box(space), &ids, &init, &config).unwrap()),
        );
    }
    group.finish();
}

fn bench_consensus_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_consensus");
    group.sample_size(10);
    let space = cloud(20, 5, 3);
    let assignment: Vec<Vec<PointId>> = (0..20).map(|i| vec![PointId(i)]).collect();
    let graph = GraphProcess::erdos_renyi(20, 0.2, 4).unwrap();
    let config = ConsensusConfig {
        epsilon: 0.2,
        max_rounds: 2_000,
        quiet_rounds: None,
        seed: 0,
        solver: SolverConfig::default(),
    };
    group.bench_function("er0.2_20nodes_eps0.2", |b| {
        b.iter(|| {
            run_consensus(
                black_box(&space),
                &assignment,
                &graph,
                &ActivityProcess::AlwaysOn,
                &config,
            )
            .unwrap()
        })
    });
    group.finish();
}

fn bench_topology(c: &mut Criterion) {
    let mut group = c.benchmark_group("topology");
    let process = GraphProcess::erdos_renyi(100, 0.01, 0).unwrap();
    group.bench_function("sample_er_n100", |b| {
        let mut t = 0u64;
        b.iter(|| {
            t += 1;
            black_box(process.sample(t))
        })
    });
    group.bench_function("strong_connectivity_n100", |b| {
        let dense = GraphProcess::erdos_renyi(100, 0.2, 1).unwrap().sample(0);
        b.iter(|| is_strongly_connected(black_box(&dense)))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_solve_meb,
    bench_coreset_refine,
    bench_consensus_run,
    bench_topology
);
criterion_main!(benches);
