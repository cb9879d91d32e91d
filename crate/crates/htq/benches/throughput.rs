//! Parallel-vs-sequential throughput comparison for the hot paths.
//!
//! `monte_carlo` has an explicit sequential twin; the remaining ops run
//! once on the default rayon pool and once pinned to a single thread.
//! Build with `--no-default-features` to benchmark the rayon-free build.

use criterion::{Criterion, criterion_group, criterion_main};
use std::hint::black_box;

use htq::adcsim::{MonteCarloConfig, monte_carlo, monte_carlo_seq};
use htq::codec::{decode, encode};
use htq::metrics::ssim;
use htq::synth::photo_like;
use htq::transform::forward_rows;
use htq::{HtConfig, ImagePlane};

fn cfg_8565() -> HtConfig {
    HtConfig::from_n0(4, 8, vec![0, 3, 2, 3]).unwrap()
}

#[cfg(feature = "parallel")]
fn run_single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(f)
}

#[cfg(not(feature = "parallel"))]
fn run_single_threaded<T>(f: impl FnOnce() -> T) -> T {
    f()
}

fn bench_transform(c: &mut Criterion) {
    let img = photo_like(512, 512, 1);
    let alphas = [0u32, 3, 2, 3];
    let mut group = c.benchmark_group("forward_rows_512");
    group.bench_function("threads_default", |b| {
        b.iter(|| forward_rows(black_box(&img), 4, &alphas).unwrap())
    });
    group.bench_function("threads_1", |b| {
        b.iter(|| run_single_threaded(|| forward_rows(black_box(&img), 4, &alphas).unwrap()))
    });
    group.finish();
}

fn bench_codec(c: &mut Criterion) {
    let img = photo_like(512, 512, 2);
    let cfg = cfg_8565();
    let coded = encode(std::slice::from_ref(&img), &cfg).unwrap();
    let mut group = c.benchmark_group("codec_512");
    group.bench_function("encode_threads_default", |b| {
        b.iter(|| encode(black_box(std::slice::from_ref(&img)), &cfg).unwrap())
    });
    group.bench_function("encode_threads_1", |b| {
        b.iter(|| {
            run_single_threaded(|| encode(black_box(std::slice::from_ref(&img)), &cfg).unwrap())
        })
    });
    group.bench_function("decode_threads_default", |b| {
        b.iter(|| decode(black_box(&coded)).unwrap())
    });
    group.finish();
}

fn bench_ssim(c: &mut Criterion) {
    let a = photo_like(512, 512, 3);
    let cfg = cfg_8565();
    let b_img: ImagePlane = decode(&encode(std::slice::from_ref(&a), &cfg).unwrap())
        .unwrap()
        .remove(0);
    let mut group = c.benchmark_group("ssim_512");
    group.sample_size(20);
    group.bench_function("threads_default", |b| {
        b.iter(|| ssim(black_box(&a), black_box(&b_img)).unwrap())
    });
    group.bench_function("threads_1", |b| {
        b.iter(|| run_single_threaded(|| ssim(black_box(&a), black_box(&b_img)).unwrap()))
    });
    group.finish();
}

fn bench_monte_carlo(c: &mut Criterion) {
    let img = photo_like(32, 32, 4);
    let cfg = cfg_8565();
    let mc = MonteCarloConfig::new(64, 0.01, 40.0, 9);
    let mut group = c.benchmark_group("monte_carlo_64x32x32");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| monte_carlo(black_box(&img), &cfg, &mc).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| monte_carlo_seq(black_box(&img), &cfg, &mc).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_transform,
    bench_codec,
    bench_ssim,
    bench_monte_carlo
);
criterion_main!(benches);
