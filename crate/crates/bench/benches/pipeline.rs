use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use shearbook_bench::l2csv_rows;
use shearbook_core::geometry::{build_profiles, WindowSpec};
use shearbook_core::ingest::{assemble_snapshots, filter_session, parse_l2, L2Format};
use shearbook_core::models::{fit, model_eval, offsets, FitConfig, ModelId};
use shearbook_core::specfun::lower_incomplete_gamma;
use shearbook_core::stats::{bootstrap_ci, permutation_pvalue, PermutationMode};
use shearbook_core::SessionFilter;

fn ingest_profile(c: &mut Criterion) {
    let csv = l2csv_rows(100_000);
    let session = SessionFilter::us_equities();
    let ws = WindowSpec::standard();
    let mut g = c.benchmark_group("ingest_profile");
    g.throughput(Throughput::Bytes(csv.len() as u64));
    g.sample_size(10);
    g.bench_function("100k_rows", |b| {
        b.iter(|| {
            let report = parse_l2(csv.as_slice(), L2Format::L2Csv);
            let snaps = filter_session(assemble_snapshots(report.records).snapshots, &session);
            black_box(build_profiles(&snaps, &ws, Some(&session)).unwrap())
        })
    });
    g.finish();
}

fn fitting(c: &mut Criterion) {
    let xs = offsets(50);
    let ys: Vec<f64> = xs.iter().map(|&x| model_eval(ModelId::IntGamma, &[100.0, 1.5, 0.1], x).unwrap()).collect();
    let cfg = FitConfig::default();
    let mut g = c.benchmark_group("fit_k50");
    for m in ModelId::ALL {
        g.bench_function(m.name(), |b| b.iter(|| black_box(fit(m, &xs, &ys, &cfg).unwrap())));
    }
    g.finish();
}

fn incomplete_gamma(c: &mut Criterion) {
    let args: Vec<(f64, f64)> =
        (0..400).map(|i| (0.1 + (i % 20) as f64 * 5.0, (i / 20) as f64 * 25.0)).collect();
    c.bench_function("lower_incomplete_gamma_400", |b| {
        b.iter(|| args.iter().map(|&(a, z)| lower_incomplete_gamma(a, z).unwrap()).sum::<f64>())
    });
}

fn resampling(c: &mut Criterion) {
    let xs: Vec<f64> = (0..200).map(|i| ((i * 7919) % 211) as f64).collect();
    let ys: Vec<f64> = xs.iter().enumerate().map(|(i, v)| v + ((i * 31) % 53) as f64).collect();
    let mut g = c.benchmark_group("stats_n200");
    g.sample_size(10);
    g.bench_function("bootstrap_10k", |b| {
        b.iter_batched(|| 1u64, |seed| bootstrap_ci(&xs, &ys, 10_000, 0.95, seed, 0).unwrap(), BatchSize::SmallInput)
    });
    g.bench_function("permutation_100k", |b| {
        b.iter(|| permutation_pvalue(&xs, &ys, 100_000, 1, 0, PermutationMode::MonteCarlo).unwrap())
    });
    g.finish();
}

criterion_group!(benches, ingest_profile, fitting, incomplete_gamma, resampling);
criterion_main!(benches);
