use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pdc_core::tables::{build_bell, build_partition_table, build_restricted_table, EulerTable};
use pdc_core::{IndexSet, Structure};

fn tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("tables");
    group.sample_size(10);
    for n in [400, 1600] {
        let k = (n as f64).sqrt().ceil() as usize;
        group.bench_with_input(BenchmarkId::new("partition-bounded", n), &n, |b, &n| {
            b.iter(|| build_partition_table(n, k).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("euler", n), &n, |b, &n| b.iter(|| EulerTable::new(n)));
        group.bench_with_input(BenchmarkId::new("bell", n), &n, |b, &n| b.iter(|| build_bell(n)));
        let spec = Structure::SetPartitions.spec(n).unwrap();
        let x = spec.tilt().value();
        let lo = (x - x.sqrt()).round().max(1.0) as usize;
        let hi = (x + x.sqrt()).round() as usize;
        let window = IndexSet::new(lo..=hi);
        group.bench_with_input(BenchmarkId::new("assembly-window", n), &n, |b, &n| {
            b.iter(|| build_restricted_table(&spec, &window, n).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, tables);
criterion_main!(benches);
