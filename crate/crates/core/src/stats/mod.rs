//! Rank correlation between shear amplitude and drift, with resampling
//! inference and multiple-testing corrections.

mod resample;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

pub use resample::{
    bootstrap_ci, for_each_permutation, permutation_pvalue, BootstrapCi, PermutationMode, PermutationTest,
    AUTO_EXHAUSTIVE_N, MAX_EXHAUSTIVE_N,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("inputs have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} observations, have {have}")]
    TooFew { need: usize, have: usize },
    #[error("input has zero rank variance")]
    ConstantInput,
    #[error("{skipped} of {total} bootstrap resamples had constant ranks")]
    TooFewValid { skipped: usize, total: usize },
    #[error("p-value {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("{asset}: {error}")]
    Asset { asset: String, error: Box<StatsError> },
}

fn check_pairs(xs: &[f64], ys: &[f64]) -> Result<(), StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return Err(StatsError::TooFew { need: 3, have: xs.len() });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidArgument("non-finite observation".into()));
    }
    Ok(())
}

/// 1-based ranks with ties sharing their average rank.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's ρ: Pearson correlation of average ranks.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    check_pairs(xs, ys)?;
    pearson(&ranks(xs), &ranks(ys)).ok_or(StatsError::ConstantInput)
}

/// Two-sided p-value from `t = ρ √((n-2)/(1-ρ²))` on n-2 degrees of freedom.
pub fn t_approx_pvalue(rho: f64, n: usize) -> Result<f64, StatsError> {
    if n < 3 {
        return Err(StatsError::TooFew { need: 3, have: n });
    }
    if rho.abs() >= 1.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| StatsError::InvalidArgument(e.to_string()))?;
    Ok((2.0 * dist.cdf(-t.abs())).min(1.0))
}

fn check_ps(ps: &[f64]) -> Result<(), StatsError> {
    match ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        Some(&p) => Err(StatsError::OutOfRange(p)),
        None => Ok(()),
    }
}

/// `min(1, m p)`.
pub fn bonferroni(ps: &[f64]) -> Result<Vec<f64>, StatsError> {
    check_ps(ps)?;
    let m = ps.len() as f64;
    Ok(ps.iter().map(|p| (m * p).min(1.0)).collect())
}

/// Benjamini–Hochberg step-up adjusted p-values, in input order.
pub fn benjamini_hochberg(ps: &[f64]) -> Result<Vec<f64>, StatsError> {
    check_ps(ps)?;
    let m = ps.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| ps[a].total_cmp(&ps[b]));
    let mut out = vec![0.0; m];
    let mut running = 1.0f64;
    for rank in (1..=m).rev() {
        let i = order[rank - 1];
        running = running.min(ps[i] * (m as f64 / rank as f64));
        out[i] = running.min(1.0);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PValueMethod {
    #[default]
    Permutation,
    /// Student-t approximation.
    T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsSettings {
    pub bootstrap: usize,
    pub level: f64,
    pub permutations: usize,
    pub seed: u64,
    pub method: PValueMethod,
    pub mode: PermutationMode,
}

impl Default for StatsSettings {
    fn default() -> Self {
        StatsSettings {
            bootstrap: 10_000,
            level: 0.95,
            permutations: 100_000,
            seed: 42,
            method: PValueMethod::Permutation,
            mode: PermutationMode::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub asset: String,
    pub rho: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub p_nominal: f64,
    pub p_fdr: f64,
    pub p_bonf: f64,
    pub n_windows: usize,
}

/// Per-asset ρ, bootstrap interval and p-value, with both corrections
/// applied across all assets together. Asset `i` uses random unit `i`.
pub fn table1_report(
    assets: &[(String, Vec<(f64, f64)>)],
    settings: &StatsSettings,
) -> Result<Vec<CorrelationReport>, StatsError> {
    let partial: Vec<(f64, BootstrapCi, f64)> = assets
        .par_iter()
        .enumerate()
        .map(|(i, (name, pairs))| {
            let wrap = |e: StatsError| StatsError::Asset { asset: name.clone(), error: Box::new(e) };
            let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            let rho = spearman_rho(&xs, &ys).map_err(wrap)?;
            let unit = i as u32;
            let ci = bootstrap_ci(&xs, &ys, settings.bootstrap, settings.level, settings.seed, unit).map_err(wrap)?;
            let p = match settings.method {
                PValueMethod::Permutation => {
                    permutation_pvalue(&xs, &ys, settings.permutations, settings.seed, unit, settings.mode)
                        .map_err(wrap)?
                        .p
                }
                PValueMethod::T => t_approx_pvalue(rho, xs.len()).map_err(wrap)?,
            };
            Ok((rho, ci, p))
        })
        .collect::<Result<_, StatsError>>()?;
    let ps: Vec<f64> = partial.iter().map(|r| r.2).collect();
    let fdr = benjamini_hochberg(&ps)?;
    let bonf = bonferroni(&ps)?;
    Ok(assets
        .iter()
        .zip(partial)
        .enumerate()
        .map(|(i, ((asset, pairs), (rho, ci, p)))| CorrelationReport {
            asset: asset.clone(),
            rho,
            ci_lo: ci.lo,
            ci_hi: ci.hi,
            p_nominal: p,
            p_fdr: fdr[i],
            p_bonf: bonf[i],
            n_windows: pairs.len(),
        })
        .collect())
}

pub const TABLE1_HEADER: &str = "asset,rho,ci_lo,ci_hi,p,p_fdr,p_bonf,n_windows";

pub fn write_table1_csv<W: Write>(mut out: W, rows: &[CorrelationReport]) -> std::io::Result<()> {
    writeln!(out, "{TABLE1_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.asset, r.rho, r.ci_lo, r.ci_hi, r.p_nominal, r.p_fdr, r.p_bonf, r.n_windows
        )?;
    }
    Ok(())
}
