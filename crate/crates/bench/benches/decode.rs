//! Search throughput: beam widths, randomness, and the raw relaxed sampler.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use monoalign_bench::bench_instance;
use monoalign_core::{
    binconcrete_sample, decode, BinConcreteParams, DistributionKind, NoiseSource, SearchConfig,
    SearchMode,
};

fn beam_widths(c: &mut Criterion) {
    let instance = bench_instance(20, 60, 1.0, 3);
    let mut group = c.benchmark_group("decode_fixed_20x60");
    for width in [1usize, 10, 50] {
        for stochastic in [false, true] {
            let config = SearchConfig {
                beam_width: width,
                stochastic,
                distribution: DistributionKind::BinConcrete,
                lambda: 0.2,
                mode: SearchMode::FixedLength,
                max_outputs: 0,
                seed: 5,
            };
            let label = format!(
                "width{width}-{}",
                if stochastic {
                    "stochastic"
                } else {
                    "deterministic"
                }
            );
            group.bench_with_input(BenchmarkId::from_parameter(label), &config, |b, config| {
                b.iter(|| decode(black_box(&instance), black_box(config)).unwrap())
            });
        }
    }
    group.finish();
}

fn relaxed_sampling(c: &mut Criterion) {
    let params = BinConcreteParams::new(0.7, 0.2).unwrap();
    c.bench_function("binconcrete_sample_1k", |b| {
        let mut noise = NoiseSource::from_seed(11);
        b.iter(|| {
            let mut acc = 0.0;
            for _ in 0..1000 {
                acc += binconcrete_sample(black_box(&params), &mut noise);
            }
            acc
        })
    });
}

criterion_group!(benches, beam_widths, relaxed_sampling);
criterion_main!(benches);
