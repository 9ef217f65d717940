use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use shearbook_core::geometry::{
    build_profiles, parse_duration, read_profiles, read_shear_csv, write_profiles, write_shear_csv, ProfileSet,
    WindowSpec,
};
use shearbook_core::ingest::snapshot_file::{read_snapshots, write_snapshots, SnapshotHeader};
use shearbook_core::ingest::{assemble_snapshots, filter_session, parse_l2, write_l2csv, L2Format};
use shearbook_core::models::{compare, fit_profiles, read_fits_csv, write_fits_csv, write_table2_csv, FitConfig, ModelId};
use shearbook_core::stats::{table1_report, write_table1_csv, StatsSettings};
use shearbook_core::substrate::{pushforward, random_graph, GraphSpec};
use shearbook_core::synth::{generate, SynthSpec};
use shearbook_core::SessionFilter;

use crate::args::*;
use crate::manifest::FileDigest;

/// Bad invocation that clap could not catch; exits 1 like a clap error.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub struct Outcome {
    pub bytes: Vec<u8>,
    pub inputs: Vec<FileDigest>,
    pub seed: Option<u64>,
}

fn read_input(path: &Path) -> Result<(Vec<u8>, FileDigest)> {
    let mut data = Vec::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_end(&mut data).context("reading stdin")?;
    } else {
        data = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    }
    let digest = FileDigest::of(path, &data);
    Ok((data, digest))
}

pub fn run(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Ingest(a) => ingest(a),
        Command::Substrate(a) => substrate(a),
        Command::Profile(a) => profile(a),
        Command::Shear(a) => shear(a),
        Command::Fit(a) => fit(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Stats(a) => stats(a),
        Command::Synth(a) => synth(a),
    }
}

fn ingest(a: &IngestArgs) -> Result<Outcome> {
    let session = if a.no_session { None } else { Some(SessionFilter::from_range(&a.session, &a.tz).map_err(|e| usage(e.to_string()))?) };
    let (data, digest) = read_input(&a.input)?;
    let format = match a.format {
        InputFormat::L2csv => L2Format::L2Csv,
        InputFormat::L2jsonl => L2Format::L2Jsonl,
    };
    let report = parse_l2(data.as_slice(), format);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if !report.errors.is_empty() {
        for e in report.errors.iter().take(20) {
            eprintln!("error: {e}");
        }
        if !a.lenient {
            bail!("{} malformed line(s) in {}", report.errors.len(), a.input.display());
        }
        eprintln!("skipped {} malformed line(s)", report.errors.len());
    }
    let mut records = report.records;
    if let Some(sym) = &a.symbol {
        records.retain(|r| &r.symbol == sym);
    } else if let Some(first) = records.first() {
        if let Some(other) = records.iter().find(|r| r.symbol != first.symbol) {
            bail!("input mixes symbols `{}` and `{}`; pass --symbol", first.symbol, other.symbol);
        }
    }
    let symbol = a.symbol.clone().or_else(|| records.first().map(|r| r.symbol.clone()));
    let assembly = assemble_snapshots(records);
    let st = assembly.stats;
    let mut snaps = assembly.snapshots;
    let before = snaps.len();
    if let Some(s) = &session {
        snaps = filter_session(snaps, s);
    }
    eprintln!(
        "ingest: {} snapshots kept, {} outside session, dropped {} crossed, {} one-sided, {} duplicate-level",
        snaps.len(),
        before - snaps.len(),
        st.crossed,
        st.one_sided,
        st.duplicate_levels
    );
    let header = SnapshotHeader::new(symbol, session, snaps.len() as u64);
    let mut bytes = Vec::new();
    write_snapshots(&mut bytes, &header, &snaps)?;
    Ok(Outcome { bytes, inputs: vec![digest], seed: None })
}

fn substrate(a: &SubstrateArgs) -> Result<Outcome> {
    let spec = GraphSpec {
        vertices: a.vertices,
        edges: a.edges,
        weight_dist: a.weight_dist,
        coord_dist: a.coord_dist,
        weight_source: a.weight_source.into(),
    };
    let graph = random_graph(&spec, a.seed)?;
    let measure = pushforward(&graph);
    let atoms: Vec<[f64; 2]> = measure.atoms().iter().map(|&(x, m)| [x, m]).collect();
    let mut bytes = serde_json::to_vec(&atoms)?;
    bytes.push(b'\n');
    eprintln!("substrate: {} atoms, total mass {}", measure.len(), measure.total_mass());
    Ok(Outcome { bytes, inputs: vec![], seed: Some(a.seed) })
}

fn profile(a: &ProfileArgs) -> Result<Outcome> {
    let duration = parse_duration(&a.window).map_err(|e| usage(e.to_string()))?;
    let spec = WindowSpec::new(duration, a.ticks, a.tick_size).map_err(|e| usage(e.to_string()))?;
    let (data, digest) = read_input(&a.input)?;
    let (header, snaps) = read_snapshots(data.as_slice())?;
    let symbol = header
        .symbol
        .clone()
        .or_else(|| snaps.first().map(|s| s.symbol.clone()))
        .unwrap_or_default();
    let (profiles, stats) = build_profiles(&snaps, &spec, header.session.as_ref())?;
    eprintln!(
        "profile: {} windows from {} snapshots ({} skipped, {} empty windows)",
        profiles.len(),
        stats.snapshots_used,
        stats.snapshots_skipped,
        stats.empty_windows
    );
    let set = ProfileSet::new(symbol, spec, header.session, stats, profiles);
    let mut bytes = Vec::new();
    write_profiles(&mut bytes, &set)?;
    Ok(Outcome { bytes, inputs: vec![digest], seed: None })
}

fn load_profiles(path: &Path) -> Result<(ProfileSet, FileDigest)> {
    let (data, digest) = read_input(path)?;
    let set = read_profiles(data.as_slice()).with_context(|| format!("reading profiles {}", path.display()))?;
    Ok((set, digest))
}

fn shear(a: &ShearArgs) -> Result<Outcome> {
    let (set, digest) = load_profiles(&a.profiles)?;
    let mut bytes = Vec::new();
    write_shear_csv(&mut bytes, &set.shear_rows(), set.spec.k)?;
    Ok(Outcome { bytes, inputs: vec![digest], seed: None })
}

fn fit(a: &FitArgs) -> Result<Outcome> {
    if a.models.is_empty() {
        return Err(usage("--models is empty"));
    }
    let (set, digest) = load_profiles(&a.profiles)?;
    let cfg = FitConfig { seed: a.seed, starts: a.starts, max_iter: a.max_iter, ..FitConfig::default() };
    let batch = fit_profiles(&set, &a.models, &cfg);
    if !batch.skipped.is_empty() {
        eprintln!("fit: skipped {} (window, side, model) triples without depth", batch.skipped.len());
    }
    let unconverged = batch.rows.iter().filter(|r| !r.fit.converged).count();
    eprintln!("fit: {} fits, {unconverged} not converged", batch.rows.len());
    let mut bytes = Vec::new();
    write_fits_csv(&mut bytes, &batch.rows)?;
    Ok(Outcome { bytes, inputs: vec![digest], seed: Some(a.seed) })
}

fn compare_cmd(a: &CompareArgs) -> Result<Outcome> {
    if a.headline == ModelId::IntGamma {
        return Err(usage("--headline must be an alternative model"));
    }
    let (data, digest) = read_input(&a.fits)?;
    let rows = read_fits_csv(data.as_slice())?;
    let table = compare(&rows, a.headline);
    if table.is_empty() {
        bail!("no gamma fits to compare in {}", a.fits.display());
    }
    let mut bytes = Vec::new();
    write_table2_csv(&mut bytes, &table)?;
    Ok(Outcome { bytes, inputs: vec![digest], seed: None })
}

fn named_input(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((name, path)) if !name.is_empty() => (name.to_string(), PathBuf::from(path)),
        _ => {
            let path = PathBuf::from(spec);
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| spec.into());
            (name, path)
        }
    }
}

fn stats(a: &StatsArgs) -> Result<Outcome> {
    let mut assets = Vec::new();
    let mut inputs = Vec::new();
    for spec in &a.shear {
        let (name, path) = named_input(spec);
        if assets.iter().any(|(n, _): &(String, _)| n == &name) {
            return Err(usage(format!("asset `{name}` given twice")));
        }
        let (data, digest) = read_input(&path)?;
        let rows = read_shear_csv(data.as_slice()).with_context(|| format!("reading {}", path.display()))?;
        let pairs: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.abs_drift.map(|d| (r.amplitude, d))).collect();
        assets.push((name, pairs));
        inputs.push(digest);
    }
    let settings = StatsSettings {
        bootstrap: a.bootstrap,
        level: a.level,
        permutations: a.perm,
        seed: a.seed,
        method: a.method.into(),
        mode: a.mode.into(),
    };
    let report = table1_report(&assets, &settings).map_err(|e| anyhow!(e))?;
    let mut bytes = Vec::new();
    write_table1_csv(&mut bytes, &report)?;
    Ok(Outcome { bytes, inputs, seed: Some(a.seed) })
}

fn synth(a: &SynthArgs) -> Result<Outcome> {
    let params = match a.generator.model() {
        ModelId::IntGamma => vec![a.c, a.gamma, a.lambda],
        ModelId::Power | ModelId::Exp => vec![a.c, a.b],
        ModelId::LogNormal => vec![a.c, a.mu, a.sigma],
    };
    let mut spec = SynthSpec::new(a.generator, params);
    spec.n_windows = a.windows;
    spec.snapshots_per_window = a.snapshots;
    spec.noise_rel = a.noise;
    spec.seed = a.seed;
    spec.k = a.ticks;
    spec.tick_size = a.tick_size;
    spec.symbol = a.symbol.clone();
    spec.start_ns = a.start_ns;
    spec.window_ns = parse_duration(&a.window).map_err(|e| usage(e.to_string()))?;
    spec.start_mid = a.mid;
    if let Some(d) = a.drift_ticks {
        spec.drift_ticks = d;
    }
    spec.shear_amp = a.shear_amp;
    let snaps = generate(&spec).map_err(|e| usage(e.to_string()))?;
    let records: Vec<_> = snaps.iter().flat_map(|s| s.to_records()).collect();
    let mut bytes = Vec::new();
    write_l2csv(&mut bytes, &records, true)?;
    eprintln!("synth: {} snapshots, {} rows", snaps.len(), records.len());
    Ok(Outcome { bytes, inputs: vec![], seed: Some(a.seed) })
}
