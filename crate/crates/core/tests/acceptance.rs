//! End-to-end acceptance checks. Runs without the libtest harness so every
//! check prints its own PASS/FAIL line even when an earlier one fails.

use std::time::{Duration, Instant};

use shearbook_core::geometry::{
    build_profiles, center_decomposition, drift_series, median, shear_field, window_measure, write_profiles, ProfileSet,
    WindowSpec,
};
use shearbook_core::ingest::snapshot_file::{write_snapshots, SnapshotHeader};
use shearbook_core::ingest::{assemble_snapshots, filter_session, parse_l2, write_l2csv, L2Format};
use shearbook_core::models::{fit, offsets, FitConfig, ModelId, ALTERNATIVES};
use shearbook_core::specfun::{lower_incomplete_gamma, quadrature_relative};
use shearbook_core::stats::{
    benjamini_hochberg, bonferroni, bootstrap_ci, for_each_permutation, permutation_pvalue, spearman_rho,
    PermutationMode,
};
use shearbook_core::synth::{generate, Generator, SynthSpec};
use shearbook_core::{BookSnapshot, Decimal, ExactPrice, SessionFilter, WindowProfile};

struct Check {
    ok: bool,
    detail: String,
}

impl Check {
    fn new() -> Self {
        Check { ok: true, detail: String::new() }
    }

    fn require(&mut self, cond: bool, what: impl Into<String>) {
        if !cond {
            self.ok = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(&what.into());
        }
    }

    fn note(&mut self, what: impl AsRef<str>) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(what.as_ref());
    }

    fn budget(&mut self, elapsed: Duration, limit: Duration) {
        self.require(elapsed < limit, format!("took {elapsed:?}, budget {limit:?}"));
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn median_of(v: impl Iterator<Item = f64>) -> f64 {
    median(&v.collect::<Vec<_>>())
}

fn profiles_of(spec: &SynthSpec) -> Vec<WindowProfile> {
    let snaps = generate(spec).expect("valid synth spec");
    let ws = WindowSpec::new(spec.window_ns, spec.k, spec.tick_size).unwrap();
    build_profiles(&snaps, &ws, None).unwrap().0
}

fn multiple_testing() -> Check {
    let mut c = Check::new();
    let p = [0.024, 0.020, 0.517, 0.706, 0.252, 0.665];
    let want_fdr = [0.072, 0.072, 0.706, 0.706, 0.505, 0.706];
    let want_bonf = [0.145, 0.121, 1.0, 1.0, 1.0, 1.0];
    let t = Instant::now();
    let fdr = benjamini_hochberg(&p).unwrap();
    let bonf = bonferroni(&p).unwrap();
    let elapsed = t.elapsed();
    for i in 0..6 {
        c.require((fdr[i] - want_fdr[i]).abs() <= 0.002, format!("fdr[{i}] = {}", fdr[i]));
        c.require((bonf[i] - want_bonf[i]).abs() <= 0.002, format!("bonf[{i}] = {}", bonf[i]));
    }
    c.budget(elapsed, Duration::from_millis(1));
    c
}

fn special_functions() -> Check {
    let mut c = Check::new();
    let t = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..20 {
        let a = 0.1 * 1000f64.powf(i as f64 / 19.0);
        for j in 0..20 {
            let z = 500.0 * j as f64 / 19.0;
            let got = lower_incomplete_gamma(a, z).unwrap();
            let f = |s: f64| if s > 0.0 { ((a - 1.0) * s.ln() - s).exp() } else { 0.0 };
            let want = quadrature_relative(f, 0.0, z, 1e-13).unwrap();
            let err = if want == 0.0 { got.abs() } else { rel(got, want) };
            worst = worst.max(err);
            c.require(err <= 1e-10, format!("a={a} z={z}: {got} vs {want}"));
        }
    }
    let mut worst_a1 = 0.0f64;
    for j in 0..=200 {
        let z = j as f64 * 0.25;
        let got = lower_incomplete_gamma(1.0, z).unwrap();
        let want = -(-z).exp_m1();
        let err = (got - want).abs() / want.max(f64::MIN_POSITIVE);
        worst_a1 = worst_a1.max(err);
        c.require(z == 0.0 && got == 0.0 || err <= 4.0 * f64::EPSILON, format!("a=1 z={z}: {got} vs {want}"));
    }
    c.budget(t.elapsed(), Duration::from_secs(5));
    c.note(format!("worst grid rel err {worst:.2e}, worst a=1 rel err {worst_a1:.2e}"));
    c
}

fn parameter_recovery() -> Check {
    let mut c = Check::new();
    let t = Instant::now();
    let truth = [100.0, 1.5, 0.1];
    let xs = offsets(50);
    let cfg = FitConfig::default();

    let mut clean = SynthSpec::new(Generator::GammaBook, truth.to_vec());
    clean.n_windows = 3;
    for p in profiles_of(&clean) {
        for ys in [&p.q_bid, &p.q_ask] {
            let f = fit(ModelId::IntGamma, &xs, ys, &cfg).unwrap();
            let sy2: f64 = ys.iter().map(|y| y * y).sum();
            for (k, (&got, &want)) in f.params.iter().zip(&truth).enumerate() {
                c.require(rel(got, want) <= 1e-3, format!("noise-free param {k}: {got}"));
            }
            c.require(f.rss < 1e-6 * sy2, format!("noise-free rss {} vs Σy² {sy2}", f.rss));
        }
    }

    let mut noisy = SynthSpec::new(Generator::GammaBook, truth.to_vec());
    noisy.noise_rel = 0.05;
    let fits: Vec<Vec<f64>> = profiles_of(&noisy)
        .iter()
        .map(|p| fit(ModelId::IntGamma, &xs, &p.q_ask, &cfg).unwrap().params)
        .collect();
    let g = median_of(fits.iter().map(|p| p[1]));
    let l = median_of(fits.iter().map(|p| p[2]));
    c.require(fits.len() == 200, format!("{} windows", fits.len()));
    c.require(rel(g, 1.5) <= 0.05, format!("median γ {g}"));
    c.require(rel(l, 0.1) <= 0.05, format!("median λ {l}"));
    c.note(format!("noisy median γ {g:.4}, λ {l:.5}"));
    c.budget(t.elapsed(), Duration::from_secs(30));
    c
}

/// AIC of every model on every (window, side), in `ModelId::ALL` order.
fn aic_table(spec: &SynthSpec) -> Vec<[f64; 4]> {
    use rayon::prelude::*;
    let xs = offsets(spec.k);
    let cfg = FitConfig::default();
    let sides: Vec<Vec<f64>> = profiles_of(spec).into_iter().flat_map(|p| [p.q_bid, p.q_ask]).collect();
    sides
        .par_iter()
        .map(|ys| {
            let mut row = [0.0; 4];
            for (i, m) in ModelId::ALL.into_iter().enumerate() {
                row[i] = fit(m, &xs, ys, &cfg).unwrap().aic;
            }
            row
        })
        .collect()
}

fn wins(table: &[[f64; 4]], model: ModelId) -> usize {
    let idx = ModelId::ALL.iter().position(|&m| m == model).unwrap();
    table
        .iter()
        .filter(|row| (0..4).min_by(|&i, &j| row[i].total_cmp(&row[j])) == Some(idx))
        .count()
}

fn model_selection() -> Check {
    let mut c = Check::new();
    let t = Instant::now();
    let mut gamma = SynthSpec::new(Generator::GammaBook, vec![100.0, 1.5, 0.1]);
    gamma.noise_rel = 0.05;
    let table = aic_table(&gamma);
    for alt in ALTERNATIVES {
        let i = ModelId::ALL.iter().position(|&m| m == alt).unwrap();
        let d = median_of(table.iter().map(|r| r[i] - r[0]));
        c.require(d > 0.0, format!("median ΔAIC vs {alt} = {d}"));
        c.note(format!("median ΔAIC vs {alt} {d:.1}"));
    }
    let gw = wins(&table, ModelId::IntGamma);
    c.require(10 * gw >= 9 * table.len(), format!("gamma AIC-best in {gw}/{}", table.len()));
    c.note(format!("gamma best {gw}/{}", table.len()));

    let mut exp = SynthSpec::new(Generator::ExpBook, vec![500.0, 0.1]);
    exp.noise_rel = 0.05;
    let table = aic_table(&exp);
    let ew = wins(&table, ModelId::Exp);
    c.require(10 * ew >= 9 * table.len(), format!("exp AIC-best in {ew}/{}", table.len()));
    c.note(format!("exp best {ew}/{}", table.len()));
    c.budget(t.elapsed(), Duration::from_secs(120));
    c
}

fn shifted(snaps: &[BookSnapshot], by: Decimal) -> Vec<BookSnapshot> {
    snaps
        .iter()
        .map(|s| {
            let mut s = s.clone();
            for lvl in s.bids.iter_mut().chain(s.asks.iter_mut()) {
                lvl.0 = lvl.0 + by;
            }
            s
        })
        .collect()
}

fn gauge_invariance() -> Check {
    let mut c = Check::new();
    let t = Instant::now();
    let mut spec = SynthSpec::new(Generator::GammaBook, vec![100.0, 1.5, 0.1]);
    spec.ask_params = vec![80.0, 1.2, 0.12];
    spec.noise_rel = 0.05;
    spec.drift_ticks = 1;
    let snaps = generate(&spec).unwrap();
    let by = spec.tick_size.checked_mul_int(7).unwrap();
    let moved = shifted(&snaps, by);
    let ws = WindowSpec::new(spec.window_ns, spec.k, spec.tick_size).unwrap();
    let (a, _) = build_profiles(&snaps, &ws, None).unwrap();
    let (b, _) = build_profiles(&moved, &ws, None).unwrap();
    c.require(a.len() == b.len() && !a.is_empty(), "window counts differ");
    let step = ExactPrice::from_decimal(by);
    for (p, q) in a.iter().zip(&b) {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        c.require(bits(&p.q_bid) == bits(&q.q_bid), format!("Q_bid differs in window {}", p.window_index));
        c.require(bits(&p.q_ask) == bits(&q.q_ask), format!("Q_ask differs in window {}", p.window_index));
        let (sp, sq) = (shear_field(p), shear_field(q));
        c.require(bits(&sp.sigma) == bits(&sq.sigma), "Σ differs");
        c.require(sp.amplitude.to_bits() == sq.amplitude.to_bits(), "A_T differs");
        c.require(q.mid.clone() - p.mid.clone() == step, format!("mid shift in window {}", p.window_index));
    }
    let per_window = spec.snapshots_per_window;
    let mut worst = 0.0f64;
    for chunk in moved.chunks(per_window) {
        let d = center_decomposition(&window_measure(chunk, spec.tick_size)).unwrap();
        worst = worst.max(d.normalized_first_moment().abs());
    }
    c.require(worst <= 1e-12, format!("recentered first moment {worst:e}"));
    c.note(format!("worst recentered first moment {worst:.1e}"));
    c.budget(t.elapsed(), Duration::from_secs(10));
    c
}

fn orthogonality() -> Check {
    let mut c = Check::new();
    let t = Instant::now();
    let translate = profiles_of(&SynthSpec::new(Generator::TranslateOnly, vec![100.0, 1.5, 0.1]));
    let series = drift_series(&translate);
    c.require(series.len() + 1 == translate.len(), "drift missing");
    c.require(series.iter().all(|&(a, _)| a == 0.0), "TRANSLATE_ONLY A_T ≠ 0");
    c.require(series.iter().all(|&(_, d)| d > 0.0), "TRANSLATE_ONLY |Δp*| = 0");

    let shear = profiles_of(&SynthSpec::new(Generator::ShearOnly, vec![100.0, 1.5, 0.1]));
    let series = drift_series(&shear);
    c.require(series.len() + 1 == shear.len(), "drift missing");
    c.require(series.iter().all(|&(_, d)| d == 0.0), "SHEAR_ONLY |Δp*| ≠ 0");
    c.require(shear.iter().all(|p| shear_field(p).amplitude > 0.0), "SHEAR_ONLY A_T = 0");
    c.budget(t.elapsed(), Duration::from_secs(10));
    c
}

fn statistics() -> Check {
    let mut c = Check::new();
    let t = Instant::now();
    // rank formula without ties, every ordering of ys
    for n in 3..=7usize {
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() + i as f64).collect();
        let base: Vec<f64> = (0..n).map(|i| (i * i) as f64 + 0.5).collect();
        let denom = (n * (n * n - 1)) as f64;
        for_each_permutation(n, |perm| {
            let ys: Vec<f64> = perm.iter().map(|&i| base[i]).collect();
            let d2: f64 = perm.iter().enumerate().map(|(i, &j)| ((i as f64) - (j as f64)).powi(2)).sum();
            let want = 1.0 - 6.0 * d2 / denom;
            let got = spearman_rho(&xs, &ys).unwrap();
            if (got - want).abs() > 1e-12 {
                c.require(false, format!("n={n} perm {perm:?}: {got} vs {want}"));
            }
        });
    }

    let xs = [0.3, 1.2, 0.7, 2.5, 1.9, 0.1, 3.3, 2.2, 1.0];
    let ys = [1.0, 0.4, 1.1, 2.0, 0.2, 0.9, 2.8, 1.5, 2.4];
    let ex = permutation_pvalue(&xs, &ys, 0, 0, 0, PermutationMode::Exhaustive).unwrap();
    let mc = permutation_pvalue(&xs, &ys, 100_000, 11, 0, PermutationMode::MonteCarlo).unwrap();
    let se = (ex.p * (1.0 - ex.p) / 100_000.0).sqrt();
    c.require((mc.p - ex.p).abs() <= 3.0 * se, format!("exhaustive {} vs MC {} (se {se:.2e})", ex.p, mc.p));
    c.note(format!("exhaustive p {:.5}, MC p {:.5}", ex.p, mc.p));

    let mut rng_x: Vec<f64> = (0..150).map(|i| ((i * 7919) % 211) as f64).collect();
    let rng_y: Vec<f64> = rng_x.iter().enumerate().map(|(i, v)| v * 0.3 + ((i * 104_729) % 97) as f64).collect();
    rng_x[3] = rng_x[4];
    let run = |threads: usize, seed: u64| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| bootstrap_ci(&rng_x, &rng_y, 10_000, 0.95, seed, 2).unwrap())
    };
    let one = run(1, 5);
    c.require(one == run(1, 5), "bootstrap not seed-deterministic");
    c.require(one == run(4, 5), "bootstrap depends on thread count");
    c.require(one != run(4, 6), "bootstrap ignores the seed");
    c.budget(t.elapsed(), Duration::from_secs(60));
    c
}

fn ingest_and_profile(csv: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let session = SessionFilter::us_equities();
    let report = parse_l2(csv, L2Format::L2Csv);
    assert!(report.errors.is_empty());
    let assembly = assemble_snapshots(report.records);
    let snaps = filter_session(assembly.snapshots, &session);
    let mut snap_bytes = Vec::new();
    let header = SnapshotHeader::new(Some("SYN".into()), Some(session.clone()), snaps.len() as u64);
    write_snapshots(&mut snap_bytes, &header, &snaps).unwrap();
    let ws = WindowSpec::standard();
    let (profiles, stats) = build_profiles(&snaps, &ws, Some(&session)).unwrap();
    let set = ProfileSet::new("SYN".into(), ws, Some(session), stats, profiles);
    let mut prof_bytes = Vec::new();
    write_profiles(&mut prof_bytes, &set).unwrap();
    (snap_bytes, prof_bytes)
}

fn throughput() -> Check {
    let mut c = Check::new();
    let mut spec = SynthSpec::new(Generator::GammaBook, vec![100.0, 1.5, 0.1]);
    spec.noise_rel = 0.05;
    spec.n_windows = 1;
    let per_window: usize = generate(&spec).unwrap().iter().map(|s| s.bids.len() + s.asks.len()).sum();
    spec.n_windows = 1_000_000usize.div_ceil(per_window);
    let records: Vec<_> = generate(&spec).unwrap().iter().flat_map(|s| s.to_records()).collect();
    let mut csv = Vec::new();
    write_l2csv(&mut csv, &records, true).unwrap();
    c.require(records.len() >= 1_000_000, format!("only {} rows", records.len()));

    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let t = Instant::now();
    let single = pool(1).install(|| ingest_and_profile(&csv));
    let serial = t.elapsed();
    let t = Instant::now();
    let multi = pool(4).install(|| ingest_and_profile(&csv));
    let parallel = t.elapsed();
    c.require(single.0 == multi.0, "snapshot bytes depend on thread count");
    c.require(single.1 == multi.1, "profile bytes depend on thread count");
    c.budget(serial, Duration::from_secs(10));
    c.note(format!("{} rows: 1 thread {serial:.2?}, 4 threads {parallel:.2?}", records.len()));
    c
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("1 multiple-testing corrections", multiple_testing),
        ("2 incomplete gamma accuracy", special_functions),
        ("3 parameter recovery", parameter_recovery),
        ("4 model-selection power", model_selection),
        ("5 gauge invariance", gauge_invariance),
        ("6 shear/drift orthogonality", orthogonality),
        ("7 statistics oracles", statistics),
        ("8 ingest+profile throughput", throughput),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let check = run();
        let status = if check.ok { "PASS" } else { "FAIL" };
        if !check.ok {
            failed += 1;
        }
        println!("criterion {name}: {status} ({:.2?}) {}", t.elapsed(), check.detail);
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
