//! Throughput benches over the data-parallel kernels. The same groups
//! exist in both scheduling builds, so saved baselines line up:
//!
//! ```text
//! cargo bench -p transdepth -- --save-baseline rayon
//! cargo bench -p transdepth --no-default-features -- --save-baseline sequential
//! ```
//!
//! The thread-sweep group additionally pins pool sizes within one build.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use transdepth::losses::{region_loss, LossOptions};
use transdepth::raster::{BinaryMask, CameraIntrinsics, DepthMap, MaskingConfig, RgbImage};
use transdepth::{
    complete_depth, erode, evaluate, normals_from_depth, synthesize_pair, with_jobs,
    CompletionOptions, MaskSet,
};

fn bench_depth(w: usize, h: usize) -> DepthMap {
    DepthMap::from_fn(w, h, |x, y| {
        1.0 + 0.3 * (x as f64 * 0.037).sin() * (y as f64 * 0.029).cos() + 0.001 * x as f64
    })
    .unwrap()
}

/// Repeating rectangles: enough structure that erosion and hole filling
/// do real work at every scale.
fn tiled_mask(w: usize, h: usize) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| x % 64 < 40 && y % 48 < 30).unwrap()
}

fn camera(w: usize, h: usize) -> CameraIntrinsics {
    CameraIntrinsics::new(500.0, 500.0, w as f64 / 2.0, h as f64 / 2.0).unwrap()
}

fn bench_erode(c: &mut Criterion) {
    let mask = tiled_mask(512, 512);
    c.bench_function("erode_512_5x5_x3", |b| {
        b.iter(|| erode(black_box(&mask), (5, 5), 3).unwrap())
    });
}

fn bench_normals(c: &mut Criterion) {
    let depth = bench_depth(512, 512);
    let k = camera(512, 512);
    c.bench_function("normals_512", |b| {
        b.iter(|| normals_from_depth(black_box(&depth), &k))
    });
}

fn bench_region_loss(c: &mut Criterion) {
    let gt = bench_depth(512, 512);
    let pred = DepthMap::from_fn(512, 512, |x, y| gt.get(x, y) + 0.01).unwrap();
    let region = tiled_mask(512, 512);
    let k = camera(512, 512);
    let opts = LossOptions::default();
    c.bench_function("region_loss_512", |b| {
        b.iter(|| region_loss(black_box(&pred), &gt, &region, &k, &opts).unwrap())
    });
}

fn bench_metrics(c: &mut Criterion) {
    let gt = bench_depth(512, 512);
    let pred = DepthMap::from_fn(512, 512, |x, y| gt.get(x, y) * 1.03).unwrap();
    let mask = tiled_mask(512, 512);
    c.bench_function("evaluate_512", |b| {
        b.iter(|| evaluate(black_box(&pred), &gt, &mask).unwrap())
    });
}

fn bench_complete(c: &mut Criterion) {
    let (w, h) = (128, 128);
    let hole = BinaryMask::from_fn(w, h, |x, y| (48..80).contains(&x) && (48..80).contains(&y))
        .unwrap();
    let full = bench_depth(w, h);
    let broken =
        DepthMap::from_fn(w, h, |x, y| if hole.is_set(x, y) { 0.0 } else { full.get(x, y) })
            .unwrap();
    // Zero tolerance pins the workload to exactly `iterations` sweeps.
    let opts = CompletionOptions { iterations: 200, tol: 0.0 };
    c.bench_function("complete_depth_128_200sweeps", |b| {
        b.iter(|| complete_depth(black_box(&broken), &hole, &opts).unwrap())
    });
}

fn bench_synthesize_pair(c: &mut Criterion) {
    let (w, h) = (512, 512);
    let rgb = RgbImage::filled(w, h, [90, 120, 150]).unwrap();
    let depth = bench_depth(w, h);
    let trans = BinaryMask::from_fn(w, h, |x, y| x / 100 == 1 && y / 100 == 1).unwrap();
    let non_a = BinaryMask::from_fn(w, h, |x, y| (300..420).contains(&x) && y < 200).unwrap();
    let non_b = tiled_mask(w, h);
    let masks = MaskSet::new(w, h, vec![trans], vec![non_a, non_b]).unwrap();
    let cfg = MaskingConfig::default();
    c.bench_function("synthesize_pair_512", |b| {
        b.iter(|| synthesize_pair(black_box(&rgb), &depth, &masks, &cfg).unwrap())
    });
}

fn bench_thread_sweep(c: &mut Criterion) {
    let depth = bench_depth(768, 512);
    let k = camera(768, 512);
    let mut group = c.benchmark_group("normals_jobs");
    for jobs in [1usize, 2, 4, 8] {
        group.bench_with_input(BenchmarkId::from_parameter(jobs), &jobs, |b, &jobs| {
            // Build the pool once; iterations run inside it.
            with_jobs(jobs, || {
                b.iter(|| normals_from_depth(black_box(&depth), &k));
            })
            .unwrap();
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench_erode, bench_normals, bench_region_loss, bench_metrics,
        bench_complete, bench_synthesize_pair, bench_thread_sweep
}
criterion_main!(benches);
