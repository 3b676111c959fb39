//! Data-parallel batch pipeline vs the sequential twins.
//!
//! Run with the default features for the rayon path, then with
//! `--no-default-features` to see the fallback cost the same code pays:
//!
//! ```text
//! cargo bench -p nlslab --bench parallel_speedup
//! cargo bench -p nlslab --bench parallel_speedup --no-default-features
//! ```

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use nlslab::batch;
use nlslab::classifier::ClassifyOptions;
use nlslab::groundstate::{sharp_constants, solve_ground_state};
use nlslab::invariants::InvariantReport;
use nlslab::{RadialField, RadialGrid};

/// Random superpositions of three off-center bumps, symmetrized, all with
/// rapidly decaying tails. Deterministic per seed.
fn smooth_batch(grid: &Arc<RadialGrid>, count: usize, seed: u64) -> Vec<RadialField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut bumps = Vec::with_capacity(3);
            for _ in 0..3 {
                let a = rng.gen_range(0.05..0.6);
                let w = rng.gen_range(0.6..2.5);
                let c = rng.gen_range(0.0..4.0);
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                bumps.push((a, w, c, phase));
            }
            RadialField::from_complex_fn(grid.clone(), |r| {
                bumps
                    .iter()
                    .map(|&(a, w, c, phase)| {
                        let lobe = |x: f64| (-(x / w) * (x / w)).exp();
                        Complex64::from_polar(a * (lobe(r - c) + lobe(r + c)), phase)
                    })
                    .sum()
            })
        })
        .collect()
}

fn bench_pipeline(c: &mut Criterion) {
    let grid = Arc::new(RadialGrid::uniform(3, 30.0, 2049).unwrap());
    let gs = solve_ground_state(3.0, 1.0, &grid, 1e-12).unwrap();
    let constants = sharp_constants(&gs);
    let opts = ClassifyOptions::default();

    let mut group = c.benchmark_group("batch_reports");
    for &count in &[64usize, 256] {
        let fields = smooth_batch(&grid, count, 7);
        group.throughput(Throughput::Elements(count as u64));
        group.bench_with_input(BenchmarkId::new("default", count), &fields, |b, f| {
            b.iter(|| batch::reports(f, 3.0))
        });
        group.bench_with_input(BenchmarkId::new("sequential", count), &fields, |b, f| {
            b.iter(|| batch::reports_seq(f, 3.0))
        });
    }
    group.finish();

    let fields = smooth_batch(&grid, 256, 11);
    let reports: Vec<InvariantReport> = batch::reports(&fields, 3.0)
        .into_iter()
        .map(|r| r.unwrap())
        .collect();

    let mut group = c.benchmark_group("batch_classify");
    group.throughput(Throughput::Elements(reports.len() as u64));
    group.bench_function("default", |b| {
        b.iter(|| {
            (
                batch::gn_margins(&reports, &constants),
                batch::classify_many(&reports, &constants, &opts),
            )
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            (
                batch::gn_margins_seq(&reports, &constants),
                batch::classify_many_seq(&reports, &constants, &opts),
            )
        })
    });
    group.finish();
}

criterion_group!(benches, bench_pipeline);
criterion_main!(benches);
