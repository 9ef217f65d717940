//! Synthetic books with known ground truth.
//!
//! Levels sit at `mid ± x·tick` for `x = 1..K`, with depth at offset `x`
//! equal to the model increment `S(x) - S(x-1)` times a log-normal factor
//! with unit mean. Each window is generated from its own random stream, so
//! output does not depend on how windows are scheduled.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::decimal::Decimal;
use crate::ingest::{BookSnapshot, Level};
use crate::models::{model_eval, ModelId};
use crate::rng::{substream, TaskKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    GammaBook,
    PowerBook,
    ExpBook,
    LognormalBook,
    /// Fixed symmetric shape, mid moved by `drift_ticks` every window.
    TranslateOnly,
    /// Fixed quotes, depth beyond offset 1 tilted towards one side.
    ShearOnly,
}

impl Generator {
    /// Model that shapes the book.
    pub fn model(self) -> ModelId {
        match self {
            Generator::PowerBook => ModelId::Power,
            Generator::ExpBook => ModelId::Exp,
            Generator::LognormalBook => ModelId::LogNormal,
            Generator::GammaBook | Generator::TranslateOnly | Generator::ShearOnly => ModelId::IntGamma,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Generator::GammaBook => "gamma",
            Generator::PowerBook => "power",
            Generator::ExpBook => "exp",
            Generator::LognormalBook => "lognormal",
            Generator::TranslateOnly => "translate",
            Generator::ShearOnly => "shear",
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "gamma" | "gamma_book" => Generator::GammaBook,
            "power" | "power_book" => Generator::PowerBook,
            "exp" | "exp_book" => Generator::ExpBook,
            "lognormal" | "lognormal_book" => Generator::LognormalBook,
            "translate" | "translate_only" => Generator::TranslateOnly,
            "shear" | "shear_only" => Generator::ShearOnly,
            other => return Err(SynthError::InvalidSpec(format!("unknown generator `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub generator: Generator,
    /// Parameters of `generator.model()` for each side.
    pub bid_params: Vec<f64>,
    pub ask_params: Vec<f64>,
    pub n_windows: usize,
    pub snapshots_per_window: usize,
    pub noise_rel: f64,
    pub seed: u64,
    pub k: usize,
    pub tick_size: Decimal,
    pub symbol: String,
    /// UTC nanoseconds of the first window.
    pub start_ns: i64,
    pub window_ns: i64,
    pub start_mid: Decimal,
    /// Mid moves by this many ticks per window.
    pub drift_ticks: i64,
    /// Largest relative tilt for `ShearOnly`; each window draws
    /// `|s| ∈ [amp/2, amp]` with a random sign.
    pub shear_amp: f64,
}

impl SynthSpec {
    /// Defaults: 200 windows of 20 snapshots over 10 s starting
    /// 2024-01-02 09:30 New York, mid 100.00, tick 0.01, K = 50.
    pub fn new(generator: Generator, params: Vec<f64>) -> Self {
        SynthSpec {
            generator,
            bid_params: params.clone(),
            ask_params: params,
            n_windows: 200,
            snapshots_per_window: 20,
            noise_rel: 0.0,
            seed: 7,
            k: 50,
            tick_size: Decimal::from_raw(1_000_000),
            symbol: "SYN".into(),
            start_ns: 1_704_205_800_000_000_000,
            window_ns: 10_000_000_000,
            start_mid: Decimal::from_int(100),
            drift_ticks: if generator == Generator::TranslateOnly { 2 } else { 0 },
            shear_amp: 0.3,
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidSpec(m));
        let model = self.generator.model();
        for (side, p) in [("bid", &self.bid_params), ("ask", &self.ask_params)] {
            if !model.is_in_domain(p) {
                return bad(format!("{side} parameters {p:?} are not valid for the {model} model"));
            }
        }
        if !(self.noise_rel >= 0.0 && self.noise_rel.is_finite()) {
            return bad("noise_rel must be >= 0".into());
        }
        if self.n_windows == 0 || self.snapshots_per_window == 0 || self.k == 0 {
            return bad("windows, snapshots and K must all be >= 1".into());
        }
        if !self.tick_size.is_positive() || self.window_ns <= 0 {
            return bad("tick size and window length must be > 0".into());
        }
        if (self.window_ns as u64) < self.snapshots_per_window as u64 {
            return bad("more snapshots than nanoseconds per window".into());
        }
        if !(self.shear_amp >= 0.0 && self.shear_amp < 1.0) {
            return bad("shear amplitude must lie in [0, 1)".into());
        }
        let reach = self.k as i64 + self.drift_ticks.unsigned_abs() as i64 * self.n_windows as i64;
        let lowest = self.tick_size.checked_mul_int(reach).map(|d| self.start_mid - d);
        if !lowest.is_some_and(|p| p.is_positive()) {
            return bad("prices would not stay positive; raise the mid or lower K/drift".into());
        }
        Ok(())
    }
}

/// `S(x) - S(x-1)` for `x = 1..=k`.
fn increments(model: ModelId, params: &[f64], k: usize) -> Vec<f64> {
    let s = |x: usize| model_eval(model, params, x as f64).expect("validated parameters");
    let mut prev = 0.0;
    (1..=k)
        .map(|x| {
            let cur = s(x);
            let d = (cur - prev).max(0.0);
            prev = cur;
            d
        })
        .collect()
}

fn size(v: f64) -> Decimal {
    Decimal::from_f64_rounded(v.max(0.0)).expect("depth fits in a decimal")
}

fn window<R: Rng>(spec: &SynthSpec, w: usize, base: &(Vec<f64>, Vec<f64>), rng: &mut R) -> Vec<BookSnapshot> {
    let k = spec.k;
    let tick = spec.tick_size.raw();
    let shift = spec.drift_ticks * w as i64 * tick;
    let mid = spec.start_mid.raw() + shift;
    let tilt = if spec.generator == Generator::ShearOnly {
        let mag = rng.random_range(0.5 * spec.shear_amp..=spec.shear_amp);
        if rng.random::<bool>() {
            mag
        } else {
            -mag
        }
    } else {
        0.0
    };
    let sigma = spec.noise_rel;
    let mut factor = || {
        if sigma == 0.0 {
            1.0
        } else {
            let z: f64 = StandardNormal.sample(rng);
            (sigma * z - 0.5 * sigma * sigma).exp()
        }
    };
    let spacing = spec.window_ns / spec.snapshots_per_window as i64;
    let t0 = spec.start_ns + w as i64 * spec.window_ns;
    (0..spec.snapshots_per_window)
        .map(|j| {
            let mut bids: Vec<Level> = Vec::with_capacity(k);
            let mut asks: Vec<Level> = Vec::with_capacity(k);
            for x in 1..=k {
                let (fb, fa) = if spec.generator == Generator::TranslateOnly {
                    let f = factor();
                    (f, f)
                } else {
                    (factor(), factor())
                };
                let lean = if x >= 2 { tilt } else { 0.0 };
                let off = x as i64 * tick;
                bids.push((Decimal::from_raw(mid - off), size(base.0[x - 1] * fb * (1.0 - lean))));
                asks.push((Decimal::from_raw(mid + off), size(base.1[x - 1] * fa * (1.0 + lean))));
            }
            BookSnapshot {
                timestamp: t0 + j as i64 * spacing,
                symbol: spec.symbol.clone(),
                bids,
                asks,
            }
        })
        .collect()
}

/// Generates every snapshot of `spec`, in time order.
pub fn generate(spec: &SynthSpec) -> Result<Vec<BookSnapshot>, SynthError> {
    spec.validate()?;
    let model = spec.generator.model();
    let base = (increments(model, &spec.bid_params, spec.k), increments(model, &spec.ask_params, spec.k));
    let windows: Vec<Vec<BookSnapshot>> = (0..spec.n_windows)
        .into_par_iter()
        .map(|w| {
            let mut rng = substream(spec.seed, w as u32, TaskKind::Synth, 0);
            window(spec, w, &base, &mut rng)
        })
        .collect();
    Ok(windows.into_iter().flatten().collect())
}
