use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pdc_bench::{label, sampler_cells};
use pdc_core::structures::{Stage1Sampler, Stage1Strategy};
use pdc_core::{rng_for_stream, IndexSet, Mode, Sampler, Structure};

fn samplers(c: &mut Criterion) {
    for structure in [Structure::Partitions, Structure::DistinctPartitions, Structure::SetPartitions] {
        let mut group = c.benchmark_group(format!("sample/{structure}"));
        group.sample_size(20);
        for n in [100, 1000] {
            let spec = structure.spec(n).unwrap();
            for (method, policy) in sampler_cells(structure, n) {
                let sampler = Sampler::build(&spec, method, policy, Mode::Fast).unwrap();
                let mut rng = rng_for_stream(1, 0);
                group.bench_with_input(BenchmarkId::new(label(method, policy), n), &n, |b, _| {
                    b.iter(|| sampler.sample(&mut rng).unwrap())
                });
            }
        }
        group.finish();
    }
}

fn exact_mode(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample-exact");
    group.sample_size(10);
    for structure in [Structure::Partitions, Structure::SetPartitions] {
        let spec = structure.spec(50).unwrap();
        let sampler = Sampler::build(&spec, pdc_core::Method::PdcRecursive, None, Mode::Exact).unwrap();
        let mut rng = rng_for_stream(2, 0);
        group.bench_function(structure.to_string(), |b| b.iter(|| sampler.sample(&mut rng).unwrap()));
    }
    group.finish();
}

fn stage1(c: &mut Criterion) {
    let mut group = c.benchmark_group("stage1");
    for structure in [Structure::Partitions, Structure::SetPartitions] {
        let spec = structure.spec(10_000).unwrap();
        for strategy in [Stage1Strategy::PerIndex, Stage1Strategy::Batched] {
            let s = Stage1Sampler::new(&spec, &IndexSet::empty(), strategy).unwrap();
            let mut rng = rng_for_stream(3, 0);
            group.bench_function(format!("{structure}/{strategy:?}"), |b| {
                b.iter(|| s.draw(Mode::Fast, None, &mut rng))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, samplers, exact_mode, stage1);
criterion_main!(benches);
