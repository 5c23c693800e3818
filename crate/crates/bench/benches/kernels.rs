use std::hint::black_box;

use abelcount_bench::problem;
use abelcount_core::census::{census, CensusConfig};
use abelcount_core::constant::{leading_constant, LocalConditions};
use abelcount_core::global::{global_ft, SUnitBasis, TensorClass};
use abelcount_core::lattice::SubgroupLattice;
use abelcount_core::FactorizationTable;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn sieve(c: &mut Criterion) {
    let mut group = c.benchmark_group("sieve");
    for bound in [100_000u64, 1_000_000] {
        group.bench_with_input(BenchmarkId::from_parameter(bound), &bound, |b, &n| {
            b.iter(|| FactorizationTable::build(black_box(n)).unwrap())
        });
    }
    group.finish();
}

fn census_kernel(c: &mut Criterion) {
    let table = FactorizationTable::build(100_000).unwrap();
    let mut group = c.benchmark_group("census");
    group.sample_size(10);
    for (g, f) in [("2", "one"), ("2,2", "sots"), ("6", "one")] {
        let (grp, func) = problem(g, f);
        group.bench_function(format!("[{g}] {f} to 1e5"), |b| {
            b.iter(|| {
                let config =
                    CensusConfig { group: &grp, function: &func, bound: 100_000, workers: 1, checkpoints: vec![] };
                census(&config, &table, |_| Ok(())).unwrap()
            })
        });
    }
    group.finish();
}

fn lattice(c: &mut Criterion) {
    let mut group = c.benchmark_group("subgroup_lattice");
    for g in ["4,2", "2,2,2,2", "8,4"] {
        let (grp, _) = problem(g, "one");
        group.bench_function(g, |b| b.iter(|| SubgroupLattice::build(black_box(&grp), 64).unwrap()));
    }
    group.finish();
}

fn euler_products(c: &mut Criterion) {
    let table = FactorizationTable::build(1_000_000).unwrap();
    let mut group = c.benchmark_group("euler_product");
    group.sample_size(10);
    let (grp, func) = problem("2", "sots");
    let basis = SUnitBasis::for_problem(&grp, &func);
    let x = TensorClass::trivial(&grp, &basis);
    group.bench_function("global transform to 1e6", |b| {
        b.iter(|| global_ft(&grp, &func, &x, &basis, 2.0, 1_000_000, &table).unwrap())
    });
    group.bench_function("leading constant to 1e6", |b| {
        b.iter(|| leading_constant(&grp, &func, &LocalConditions::new(), 1_000_000, &table).unwrap())
    });
    group.finish();
}

criterion_group!(benches, sieve, census_kernel, lattice, euler_products);
criterion_main!(benches);
