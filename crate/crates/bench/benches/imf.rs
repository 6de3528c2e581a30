use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use imfkit_bench::bench_pair;
use imfkit_core::pano::{fuse_exposures, FusionParams};
use imfkit_core::{apply_imf, estimate_chm, estimate_gc, estimate_wha, Method};
use std::hint::black_box;

fn estimators(c: &mut Criterion) {
    let pair = bench_pair(400, 300);
    let mut g = c.benchmark_group("estimate");
    g.bench_function("wha", |b| b.iter(|| estimate_wha(black_box(&pair.a), black_box(&pair.b)).unwrap()));
    g.bench_function("chm", |b| b.iter(|| estimate_chm(black_box(&pair.a), black_box(&pair.b)).unwrap()));
    g.bench_function("gc", |b| b.iter(|| estimate_gc(black_box(&pair.a), black_box(&pair.b)).unwrap()));
    g.finish();
}

fn end_to_end(c: &mut Criterion) {
    let mut g = c.benchmark_group("wha_estimate_complete_apply");
    g.sample_size(20);
    for (w, h) in [(400, 250), (1600, 1000)] {
        let pair = bench_pair(w, h);
        g.bench_with_input(BenchmarkId::from_parameter(format!("{w}x{h}")), &pair, |b, p| {
            b.iter(|| {
                let t = Method::Wha.estimate_total(&p.a, &p.b).unwrap();
                apply_imf(&p.a, &t).unwrap()
            })
        });
    }
    g.finish();
}

fn fusion(c: &mut Criterion) {
    let pair = bench_pair(256, 256);
    let layers = vec![pair.a.clone(), pair.b.clone()];
    let params = FusionParams::default();
    c.bench_function("fuse_two_256", |b| b.iter(|| fuse_exposures(black_box(&layers), &params).unwrap()));
}

criterion_group!(benches, estimators, end_to_end, fusion);
criterion_main!(benches);
