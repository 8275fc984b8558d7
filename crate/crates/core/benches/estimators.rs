use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tga::oracle::sigma_m_exec;
use tga::{estimate, Budget, ConstantKind, Exec, Grid, OracleOptions, Space};

fn executors() -> Vec<(&'static str, Exec)> {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    vec![("sequential", Exec::Sequential), ("parallel", Exec::with_threads(cores.max(2)))]
}

fn bench_estimate(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate");
    group.sample_size(10);
    let budget = Budget {
        grid: Grid::Coarse,
        samples: 200,
        hillclimb_rounds: 20,
        seed: 1,
        ..Budget::default()
    };
    let space = Space::real("lorentz:3,2,1,1,1", None).unwrap();
    for (name, exec) in executors() {
        for kind in [ConstantKind::Cg, ConstantKind::QStar] {
            group.bench_with_input(BenchmarkId::new(name, kind), &kind, |b, &kind| {
                b.iter(|| estimate::<f64>(&space, kind, &budget, &exec).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_sigma(c: &mut Criterion) {
    let mut group = c.benchmark_group("sigma_generic");
    let space = Space::real("lp:1.5", Some(10)).unwrap();
    let f: Vec<f64> = (1..=10).map(|i| (i as f64 * 0.7).sin()).collect();
    let opts = OracleOptions::generic();
    for (name, exec) in executors() {
        group.bench_function(name, |b| {
            b.iter(|| sigma_m_exec(&space, black_box(&f), 4, &opts, &exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_estimate, bench_sigma);
criterion_main!(benches);
