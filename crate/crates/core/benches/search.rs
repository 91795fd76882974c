//! Sequential vs rayon execution of the data-parallel kernels, plus the
//! solvers themselves at each pruning level.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use scout_duel::bench::{random_map, run_node_count_sweep, run_success_fraction, MapSource, SuccessSpec, SweepSpec};
use scout_duel::game::{RewardModel, Scenario};
use scout_duel::gridworld::VisibilityOracle;
use scout_duel::minimax::{minimax_search, PruningLevel, SearchConfig};
use scout_duel::oracle::brute_force_value_with;
use scout_duel::par::Execution;
use scout_duel::value::int;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn visibility(c: &mut Criterion) {
    let map = random_map(1, 40, 40, 0.2).unwrap();
    let mut g = c.benchmark_group("visibility_build_40x40");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| VisibilityOracle::build_with(black_box(&map), None, exec)));
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let map = random_map(2, 8, 8, 0.15).unwrap();
    let s = Scenario::with_map(map, RewardModel::scout(int(3)), 3).unwrap();
    let root = s.initial_state();
    let mut g = c.benchmark_group("oracle_8x8_t3");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| brute_force_value_with(&s, black_box(&root), exec).unwrap()));
    }
    g.finish();
}

fn sweeps(c: &mut Criterion) {
    let spec = SweepSpec {
        source: MapSource::Random { width: 6, height: 6, density: 0.15 },
        horizons: vec![1, 2, 3],
        penalties: vec![int(3)],
        pruning: vec![PruningLevel::None, PruningLevel::AlphaBeta, PruningLevel::Bounds],
        trials: 8,
        base_seed: 0,
        check_oracle: true,
    };
    let success = SuccessSpec {
        map: random_map(3, 8, 8, 0.15).unwrap(),
        horizons: vec![3],
        penalty: int(3),
        budgets: vec![100, 1000],
        trials: 16,
        base_seed: 0,
        c: 8.0,
        history: false,
    };
    let mut g = c.benchmark_group("sweeps");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("node_count", name), |b| b.iter(|| run_node_count_sweep(black_box(&spec), exec).unwrap()));
        g.bench_function(BenchmarkId::new("success_fraction", name), |b| {
            b.iter(|| run_success_fraction(black_box(&success), exec).unwrap())
        });
    }
    g.finish();
}

fn pruning_levels(c: &mut Criterion) {
    let map = random_map(4, 10, 10, 0.15).unwrap();
    let s = Scenario::with_map(map, RewardModel::scout(int(3)), 4).unwrap();
    let root = s.initial_state();
    let mut g = c.benchmark_group("minimax_10x10_t4");
    g.sample_size(10);
    for level in [PruningLevel::None, PruningLevel::AlphaBeta, PruningLevel::Bounds, PruningLevel::All] {
        let cfg = SearchConfig::new(level);
        g.bench_function(level.as_str(), |b| b.iter(|| minimax_search(&s, black_box(&root), &cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, visibility, oracle, sweeps, pruning_levels);
criterion_main!(benches);
