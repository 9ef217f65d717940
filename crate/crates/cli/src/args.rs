use std::fmt::Display;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};
use shearbook_core::models::ModelId;
use shearbook_core::stats::{PValueMethod, PermutationMode};
use shearbook_core::substrate::{Distribution, WeightSource};
use shearbook_core::synth::Generator;
use shearbook_core::Decimal;

fn display<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "shearbook", version, about = "Order-book liquidity geometry toolkit", arg_required_else_help = true)]
pub struct Cli {
    /// Worker threads (default: all cores). Never changes output bytes.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// key=value file mirroring the long flags; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Parse Level II records into a snapshot file.
    Ingest(IngestArgs),
    /// Sample a weighted graph and write its projected measure.
    Substrate(SubstrateArgs),
    /// Build per-window cumulative depth profiles.
    Profile(ProfileArgs),
    /// Shear field, amplitude and drift per window as CSV.
    Shear(ShearArgs),
    /// Fit cumulative depth models to every window and side.
    Fit(FitArgs),
    /// Summarize fits into a model-comparison table.
    Compare(CompareArgs),
    /// Shear/drift rank correlation with corrected p-values.
    Stats(StatsArgs),
    /// Generate a synthetic book as L2CSV.
    Synth(SynthArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Substrate(_) => "substrate",
            Command::Profile(_) => "profile",
            Command::Shear(_) => "shear",
            Command::Fit(_) => "fit",
            Command::Compare(_) => "compare",
            Command::Stats(_) => "stats",
            Command::Synth(_) => "synth",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    L2csv,
    L2jsonl,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    /// L2 input file, `-` for stdin.
    #[arg(long, default_value = "-")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "l2csv")]
    pub format: InputFormat,
    /// Keep only this symbol. Required when the input mixes symbols.
    #[arg(long)]
    pub symbol: Option<String>,
    /// Local trading hours, HH:MM-HH:MM.
    #[arg(long, default_value = "09:30-16:00")]
    pub session: String,
    #[arg(long, default_value = "America/New_York")]
    pub tz: String,
    /// Keep records outside the session.
    #[arg(long)]
    pub no_session: bool,
    /// Skip malformed lines instead of failing.
    #[arg(long)]
    pub lenient: bool,
    /// Snapshot file (JSONL), stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightSourceArg {
    Vertex,
    Edges,
}

impl From<WeightSourceArg> for WeightSource {
    fn from(w: WeightSourceArg) -> Self {
        match w {
            WeightSourceArg::Vertex => WeightSource::Vertex,
            WeightSourceArg::Edges => WeightSource::Edges,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SubstrateArgs {
    #[arg(long, default_value_t = 1000)]
    pub vertices: usize,
    #[arg(long, default_value_t = 3000)]
    pub edges: usize,
    /// const:v | uniform:a,b | int:a,b | normal:m,s | lognormal:m,s | exp:rate
    #[arg(long, default_value = "exp:1")]
    #[serde(serialize_with = "display")]
    pub weight_dist: Distribution,
    #[arg(long, default_value = "normal:0,1")]
    #[serde(serialize_with = "display")]
    pub coord_dist: Distribution,
    #[arg(long, value_enum, default_value = "vertex")]
    pub weight_source: WeightSourceArg,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ProfileArgs {
    /// Snapshot file from `ingest`, `-` for stdin.
    #[arg(long = "in", default_value = "-")]
    pub input: PathBuf,
    /// Window length: 10s, 250ms, 2m, or plain seconds.
    #[arg(long, default_value = "10s")]
    pub window: String,
    #[arg(long, default_value_t = 50)]
    pub ticks: usize,
    #[arg(long, default_value = "0.01")]
    #[serde(serialize_with = "display")]
    pub tick_size: Decimal,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ShearArgs {
    #[arg(long, default_value = "-")]
    pub profiles: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    #[arg(long, default_value = "-")]
    pub profiles: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "gamma,power,exp,lognormal")]
    pub models: Vec<ModelId>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Multistart count.
    #[arg(long, default_value_t = 8)]
    pub starts: usize,
    #[arg(long, default_value_t = 4000)]
    pub max_iter: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[arg(long, default_value = "-")]
    pub fits: PathBuf,
    /// Alternative reported in the headline dAIC column.
    #[arg(long, default_value = "lognormal")]
    pub headline: ModelId,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Permutation,
    T,
}

impl From<MethodArg> for PValueMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Permutation => PValueMethod::Permutation,
            MethodArg::T => PValueMethod::T,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Auto,
    Mc,
    Exhaustive,
}

impl From<ModeArg> for PermutationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Auto => PermutationMode::Auto,
            ModeArg::Mc => PermutationMode::MonteCarlo,
            ModeArg::Exhaustive => PermutationMode::Exhaustive,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct StatsArgs {
    /// Shear CSV, optionally named: `AAPL=aapl_shear.csv`. Repeat per asset;
    /// the file stem names unnamed inputs.
    #[arg(long, required = true)]
    pub shear: Vec<String>,
    #[arg(long, default_value_t = 10_000)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 100_000)]
    pub perm: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, value_enum, default_value = "permutation")]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// gamma | power | exp | lognormal | translate | shear
    #[arg(long, default_value = "gamma")]
    #[serde(serialize_with = "display")]
    pub generator: Generator,
    /// Scale of the depth density.
    #[arg(long = "C", default_value_t = 100.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    /// Exponent of the power and rate of the exponential book.
    #[arg(long, default_value_t = 0.1)]
    pub b: f64,
    #[arg(long, default_value_t = 2.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 200)]
    pub windows: usize,
    #[arg(long, default_value_t = 20)]
    pub snapshots: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub ticks: usize,
    #[arg(long, default_value = "0.01")]
    #[serde(serialize_with = "display")]
    pub tick_size: Decimal,
    #[arg(long, default_value = "SYN")]
    pub symbol: String,
    /// First window start, UTC nanoseconds.
    #[arg(long, default_value_t = 1_704_205_800_000_000_000)]
    pub start_ns: i64,
    #[arg(long, default_value = "10s")]
    pub window: String,
    #[arg(long, default_value = "100")]
    #[serde(serialize_with = "display")]
    pub mid: Decimal,
    /// Ticks per window for `translate` (default 2, others 0).
    #[arg(long)]
    pub drift_ticks: Option<i64>,
    #[arg(long, default_value_t = 0.3)]
    pub shear_amp: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
