use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mftg_core::fixtures::{example1, example2, two_node};
use mftg_core::simulator::{estimate_value, exact_team_optimum, InitialStates, JointCountState, OracleOptions};
use mftg_core::solver::{solve, SimplexGrid, SolveOptions, ValueKind};
use mftg_core::{Execution, LocalPolicy, TeamStrategy};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn bench_solve(c: &mut Criterion) {
    let f = example1().unwrap();
    let g = SimplexGrid::new(2, 200).unwrap();
    let mut group = c.benchmark_group("solve_example1_g200");
    group.sample_size(10);
    for (name, execution) in MODES {
        let opts = SolveOptions {
            execution,
            ..SolveOptions::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &opts, |b, opts| {
            b.iter(|| solve(&f.model, &g, &g, black_box(opts), ValueKind::Lower).unwrap())
        });
    }
    group.finish();
}

fn bench_estimate(c: &mut Criterion) {
    let f = two_node(0.5, 3).unwrap();
    let blue = TeamStrategy::constant(LocalPolicy::uniform(2, 2));
    let red = TeamStrategy::constant(LocalPolicy::uniform(2, 2));
    let init = InitialStates::new(vec![0; 20], vec![1; 20]);
    let mut group = c.benchmark_group("estimate_two_node_2000");
    group.sample_size(10);
    for (name, execution) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| estimate_value(&f.model, &blue, &red, &init, black_box(2000), 1, execution).unwrap())
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let f = example2().unwrap();
    let init = JointCountState::new(vec![96, 0], vec![3, 2]).unwrap();
    let mut group = c.benchmark_group("oracle_example2_n96");
    group.sample_size(10);
    for (name, execution) in MODES {
        let opts = OracleOptions {
            execution,
            ..OracleOptions::default()
        };
        group.bench_function(name, |b| b.iter(|| exact_team_optimum(&f.model, black_box(&init), &opts).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_solve, bench_estimate, bench_oracle);
criterion_main!(benches);
