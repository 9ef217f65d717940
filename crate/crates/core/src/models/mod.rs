//! Cumulative liquidity models, least-squares fitting and AIC comparison.
//!
//! Every model is `scale * g(shape, x)`, so the scale is solved in closed
//! form for any shape and only the shape parameters are searched.

mod compare;
mod io;
mod optim;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::geometry::ProfileSet;
use crate::ingest::Side;
use crate::rng::{substream, TaskKind};
use crate::specfun::ln_lower_incomplete_gamma;

pub use compare::{compare, iqr, quantile_type7, ComparisonRow, FitRow, ALTERNATIVES};
pub use io::{read_fits_csv, write_fits_csv, write_table2_csv, FITS_HEADER, TABLE2_HEADER};
pub use optim::{nelder_mead, NmOutcome, NmSettings};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{model}: parameters {params:?} outside the model domain")]
    BoundsViolation { model: ModelId, params: Vec<f64> },
    #[error("all depths are zero")]
    DegenerateData,
    #[error("need at least {need} points, have {have}")]
    TooFewPoints { need: usize, have: usize },
    #[error("inputs differ in length or contain non-finite values")]
    InvalidInput,
    #[error("zero variance in observations")]
    ZeroVariance,
    #[error("unknown model `{0}`")]
    UnknownModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    IntGamma,
    Power,
    Exp,
    LogNormal,
}

impl ModelId {
    pub const ALL: [ModelId; 4] = [ModelId::IntGamma, ModelId::Power, ModelId::Exp, ModelId::LogNormal];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::IntGamma => "gamma",
            ModelId::Power => "power",
            ModelId::Exp => "exp",
            ModelId::LogNormal => "lognormal",
        }
    }

    pub fn n_params(self) -> usize {
        match self {
            ModelId::IntGamma | ModelId::LogNormal => 3,
            ModelId::Power | ModelId::Exp => 2,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelId::IntGamma => &["C", "gamma", "lambda"],
            ModelId::Power | ModelId::Exp => &["a", "b"],
            ModelId::LogNormal => &["a", "mu", "sigma"],
        }
    }

    pub fn is_in_domain(self, params: &[f64]) -> bool {
        if params.len() != self.n_params() || params.iter().any(|p| !p.is_finite()) {
            return false;
        }
        match self {
            ModelId::IntGamma => params[0] > 0.0 && params[1] >= 0.0 && params[2] > 0.0,
            ModelId::Power | ModelId::Exp => params[0] > 0.0 && params[1] > 0.0,
            ModelId::LogNormal => params[0] > 0.0 && params[2] > 0.0,
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gamma" | "int_gamma" | "intgamma" => Ok(ModelId::IntGamma),
            "power" => Ok(ModelId::Power),
            "exp" | "exponential" => Ok(ModelId::Exp),
            "lognormal" | "log_normal" => Ok(ModelId::LogNormal),
            _ => Err(ModelError::UnknownModel(s.to_string())),
        }
    }
}

impl Serialize for ModelId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ModelId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a comma-separated model list such as `gamma,power,exp,lognormal`.
pub fn parse_model_list(s: &str) -> Result<Vec<ModelId>, ModelError> {
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let m: ModelId = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    Ok(out)
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `g(shape, x)` with unit scale.
fn unit_curve(model: ModelId, shape: &[f64], x: f64) -> f64 {
    match model {
        ModelId::IntGamma => {
            if x == 0.0 {
                return 0.0;
            }
            let a = shape[0] + 1.0;
            let lam = shape[1];
            match ln_lower_incomplete_gamma(a, lam * x) {
                Ok(l) => (l - a * lam.ln()).exp(),
                Err(_) => f64::NAN,
            }
        }
        ModelId::Power => x.powf(shape[0]),
        ModelId::Exp => -(-shape[0] * x).exp_m1(),
        ModelId::LogNormal => {
            if x == 0.0 {
                0.0
            } else {
                std_normal_cdf((x.ln() - shape[0]) / shape[1])
            }
        }
    }
}

/// Cumulative depth of `model` at offset `x > 0`.
pub fn model_eval(model: ModelId, params: &[f64], x: f64) -> Result<f64, ModelError> {
    if !model.is_in_domain(params) || !(x >= 0.0) {
        return Err(ModelError::BoundsViolation { model, params: params.to_vec() });
    }
    Ok(params[0] * unit_curve(model, &params[1..], x))
}

/// `n ln(rss/n) + 2(k+1)`, with `rss` floored at 1e-300.
pub fn aic(rss: f64, n: usize, k_params: usize) -> f64 {
    let n_f = n as f64;
    n_f * (rss.max(1e-300) / n_f).ln() + 2.0 * (k_params as f64 + 1.0)
}

/// `1 - RSS/TSS` about the mean of `ys`.
pub fn r_squared(ys: &[f64], fitted: &[f64]) -> Result<f64, ModelError> {
    if ys.len() != fitted.len() || ys.len() < 2 {
        return Err(ModelError::InvalidInput);
    }
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let tss: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    if tss == 0.0 {
        return Err(ModelError::ZeroVariance);
    }
    let rss: f64 = ys.iter().zip(fitted).map(|(y, f)| (y - f).powi(2)).sum();
    Ok(1.0 - rss / tss)
}

/// Search box and start grid, in the optimizer's coordinates.
struct Space {
    lo: Vec<f64>,
    hi: Vec<f64>,
    axes: Vec<Vec<f64>>,
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Fit bounds on the shape parameters.
pub const GAMMA_SHAPE_MAX: f64 = 60.0;
pub const GAMMA_DECAY_BOUNDS: (f64, f64) = (1e-6, 1e3);
pub const POWER_EXPONENT_BOUNDS: (f64, f64) = (1e-6, 20.0);
pub const EXP_RATE_BOUNDS: (f64, f64) = (1e-6, 50.0);
pub const LOGNORMAL_MU_BOUNDS: (f64, f64) = (-20.0, 40.0);
pub const LOGNORMAL_SIGMA_BOUNDS: (f64, f64) = (1e-3, 100.0);

fn space(model: ModelId) -> Space {
    match model {
        ModelId::IntGamma => Space {
            lo: vec![0.0, GAMMA_DECAY_BOUNDS.0.ln()],
            hi: vec![GAMMA_SHAPE_MAX, GAMMA_DECAY_BOUNDS.1.ln()],
            axes: vec![
                vec![0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.5, 7.0, 11.0, 18.0, 30.0, 45.0, 60.0],
                logspace(1e-5, 1e2, 22),
            ],
        },
        ModelId::Power => Space {
            lo: vec![POWER_EXPONENT_BOUNDS.0.ln()],
            hi: vec![POWER_EXPONENT_BOUNDS.1.ln()],
            axes: vec![logspace(1e-3, 20.0, 30)],
        },
        ModelId::Exp => Space {
            lo: vec![EXP_RATE_BOUNDS.0.ln()],
            hi: vec![EXP_RATE_BOUNDS.1.ln()],
            axes: vec![logspace(1e-5, 50.0, 30)],
        },
        ModelId::LogNormal => Space {
            lo: vec![LOGNORMAL_MU_BOUNDS.0, LOGNORMAL_SIGMA_BOUNDS.0.ln()],
            hi: vec![LOGNORMAL_MU_BOUNDS.1, LOGNORMAL_SIGMA_BOUNDS.1.ln()],
            axes: vec![linspace(-5.0, 15.0, 21), logspace(0.05, 20.0, 14)],
        },
    }
}

/// Optimizer coordinates to shape parameters.
fn to_shape(model: ModelId, u: &[f64]) -> Vec<f64> {
    match model {
        ModelId::IntGamma => vec![u[0], u[1].exp()],
        ModelId::Power | ModelId::Exp => vec![u[0].exp()],
        ModelId::LogNormal => vec![u[0], u[1].exp()],
    }
}

fn from_shape(model: ModelId, shape: &[f64]) -> Vec<f64> {
    match model {
        ModelId::IntGamma => vec![shape[0], shape[1].ln()],
        ModelId::Power | ModelId::Exp => vec![shape[0].ln()],
        ModelId::LogNormal => vec![shape[0], shape[1].ln()],
    }
}

/// Least-squares scale for a fixed shape, and the resulting RSS.
fn profiled(model: ModelId, shape: &[f64], xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let g: Vec<f64> = xs.iter().map(|&x| unit_curve(model, shape, x)).collect();
    if g.iter().any(|v| !v.is_finite()) {
        return (f64::NAN, f64::INFINITY);
    }
    let sgg: f64 = g.iter().map(|v| v * v).sum();
    let syg: f64 = g.iter().zip(ys).map(|(v, y)| v * y).sum();
    let scale = if sgg > 0.0 && syg > 0.0 { syg / sgg } else { f64::MIN_POSITIVE };
    let rss = g.iter().zip(ys).map(|(v, y)| (y - scale * v).powi(2)).sum();
    (scale, rss)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub seed: u64,
    pub starts: usize,
    pub max_iter: usize,
    pub ftol: f64,
    pub xtol: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { seed: 42, starts: 8, max_iter: 4000, ftol: 1e-12, xtol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelId,
    pub params: Vec<f64>,
    pub n_points: usize,
    pub rss: f64,
    /// NaN when the observations have zero variance.
    pub r2: f64,
    pub aic: f64,
    pub converged: bool,
    pub iterations: usize,
    /// The observations were not nondecreasing.
    #[serde(default)]
    pub nonmonotone_input: bool,
}

fn validate(model: ModelId, xs: &[f64], ys: &[f64]) -> Result<(), ModelError> {
    if xs.len() != ys.len() || xs.iter().chain(ys).any(|v| !v.is_finite()) || xs.iter().any(|&x| x <= 0.0) {
        return Err(ModelError::InvalidInput);
    }
    let need = model.n_params() + 2;
    if ys.len() < need {
        return Err(ModelError::TooFewPoints { need, have: ys.len() });
    }
    if ys.iter().all(|&y| y == 0.0) {
        return Err(ModelError::DegenerateData);
    }
    Ok(())
}

struct Problem<'a> {
    model: ModelId,
    xs: &'a [f64],
    ys: &'a [f64],
    space: Space,
    nm: NmSettings,
}

impl Problem<'_> {
    fn new<'a>(model: ModelId, xs: &'a [f64], ys: &'a [f64], cfg: &FitConfig) -> Problem<'a> {
        let sum_sq: f64 = ys.iter().map(|y| y * y).sum();
        Problem {
            model,
            xs,
            ys,
            space: space(model),
            nm: NmSettings { max_iter: cfg.max_iter, ftol: cfg.ftol, fabs: 1e-30 * sum_sq, xtol: cfg.xtol },
        }
    }

    fn rss(&self, u: &[f64]) -> f64 {
        profiled(self.model, &to_shape(self.model, u), self.xs, self.ys).1
    }

    fn step(&self, u: &[f64], fraction: f64) -> Vec<f64> {
        // a fraction of the local grid spacing
        self.space
            .axes
            .iter()
            .zip(u)
            .map(|(axis, &v)| {
                let i = axis.partition_point(|&a| a < v).clamp(1, axis.len() - 1);
                fraction * (axis[i] - axis[i - 1])
            })
            .collect()
    }

    fn run(&self, start: &[f64], fraction: f64) -> NmOutcome {
        let step = self.step(start, fraction);
        nelder_mead(|u| self.rss(u), start, &step, &self.space.lo, &self.space.hi, &self.nm)
    }

    /// Runs from each start, then restarts once from the best point.
    fn solve(&self, starts: &[Vec<f64>]) -> (NmOutcome, usize, bool) {
        let mut best: Option<NmOutcome> = None;
        let mut iterations = 0;
        let mut any_converged = false;
        for s in starts {
            let r = self.run(s, 0.5);
            iterations += r.iterations;
            any_converged |= r.converged;
            if best.as_ref().map_or(true, |b| r.f < b.f) {
                best = Some(r);
            }
        }
        let first = best.expect("at least one start");
        let again = self.run(&first.x, 0.05);
        iterations += again.iterations;
        any_converged |= again.converged;
        let best = if again.f <= first.f { again } else { first };
        (best, iterations, any_converged)
    }

    fn result(&self, u: &[f64], iterations: usize, converged: bool) -> FitResult {
        let model = self.model;
        let shape = to_shape(model, u);
        let (scale, rss) = profiled(model, &shape, self.xs, self.ys);
        let mut params = vec![scale];
        params.extend(shape);
        let fitted: Vec<f64> = self.xs.iter().map(|&x| scale * unit_curve(model, &params[1..], x)).collect();
        let n = self.ys.len();
        FitResult {
            model,
            r2: r_squared(self.ys, &fitted).unwrap_or(f64::NAN),
            aic: aic(rss, n, model.n_params()),
            params,
            n_points: n,
            rss,
            converged,
            iterations,
            nonmonotone_input: self.ys.windows(2).any(|w| w[1] < w[0]),
        }
    }

    /// Best grid cells by RSS, each start jittered inside its cell.
    fn grid_starts(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let axes = &self.space.axes;
        let mut cells: Vec<Vec<usize>> = vec![vec![]];
        for axis in axes {
            cells = cells
                .into_iter()
                .flat_map(|c| {
                    (0..axis.len()).map(move |i| {
                        let mut c = c.clone();
                        c.push(i);
                        c
                    })
                })
                .collect();
        }
        let mut scored: Vec<(f64, Vec<usize>)> = cells
            .into_iter()
            .map(|c| {
                let u: Vec<f64> = c.iter().zip(axes).map(|(&i, a)| a[i]).collect();
                (self.rss(&u), c)
            })
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let mut rng = substream(seed, self.model as u32, TaskKind::FitStart, 0);
        scored
            .into_iter()
            .take(count.max(1))
            .map(|(_, c)| {
                c.iter()
                    .zip(axes)
                    .enumerate()
                    .map(|(d, (&i, axis))| {
                        let left = if i > 0 { axis[i] - axis[i - 1] } else { 0.0 };
                        let right = if i + 1 < axis.len() { axis[i + 1] - axis[i] } else { 0.0 };
                        let v = axis[i] + rng.random_range(-0.5..=0.5) * if rng.random::<bool>() { right } else { left };
                        v.clamp(self.space.lo[d], self.space.hi[d])
                    })
                    .collect()
            })
            .collect()
    }
}

/// Least-squares fit of `model` to `(xs, ys)` from a grid of starts.
pub fn fit(model: ModelId, xs: &[f64], ys: &[f64], cfg: &FitConfig) -> Result<FitResult, ModelError> {
    validate(model, xs, ys)?;
    let problem = Problem::new(model, xs, ys, cfg);
    let starts = problem.grid_starts(cfg.starts, cfg.seed);
    let (best, iterations, converged) = problem.solve(&starts);
    Ok(problem.result(&best.x, iterations, converged))
}

/// Like [`fit`] with `params` as the only start.
pub fn fit_from(
    model: ModelId,
    xs: &[f64],
    ys: &[f64],
    params: &[f64],
    cfg: &FitConfig,
) -> Result<FitResult, ModelError> {
    validate(model, xs, ys)?;
    if !model.is_in_domain(params) {
        return Err(ModelError::BoundsViolation { model, params: params.to_vec() });
    }
    let problem = Problem::new(model, xs, ys, cfg);
    let (best, iterations, converged) = problem.solve(&[from_shape(model, &params[1..])]);
    Ok(problem.result(&best.x, iterations, converged))
}

/// Offsets `1..=k` as reals.
pub fn offsets(k: usize) -> Vec<f64> {
    (1..=k).map(|x| x as f64).collect()
}

/// Fits of every requested model to both sides of every window.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitBatch {
    pub rows: Vec<FitRow>,
    /// (window_index, side, model) skipped because the side had no depth.
    pub skipped: Vec<(i64, Side, ModelId)>,
}

/// Fits are independent and run in parallel; output order is fixed by
/// window, then side (bid first), then the order of `models`.
pub fn fit_profiles(set: &ProfileSet, models: &[ModelId], cfg: &FitConfig) -> FitBatch {
    let xs = offsets(set.spec.k);
    let tasks: Vec<(usize, Side, ModelId)> = (0..set.profiles.len())
        .flat_map(|w| {
            [Side::Bid, Side::Ask]
                .into_iter()
                .flat_map(move |side| models.iter().map(move |&m| (w, side, m)))
        })
        .collect();
    let results: Vec<_> = tasks
        .par_iter()
        .map(|&(w, side, m)| {
            let p = &set.profiles[w];
            let ys = match side {
                Side::Bid => &p.q_bid,
                Side::Ask => &p.q_ask,
            };
            (p.window_index, side, m, fit(m, &xs, ys, cfg))
        })
        .collect();
    let mut batch = FitBatch::default();
    for (window_index, side, model, r) in results {
        match r {
            Ok(fit) => batch.rows.push(FitRow { asset: set.symbol.clone(), side, window_index, fit }),
            Err(_) => batch.skipped.push((window_index, side, model)),
        }
    }
    batch
}
