use std::collections::{BTreeMap, BTreeSet};

use super::{FitResult, ModelId};
use crate::geometry::median;
use crate::ingest::Side;

/// Alternatives compared against the integrated-gamma model, in column order.
pub const ALTERNATIVES: [ModelId; 3] = [ModelId::Power, ModelId::Exp, ModelId::LogNormal];

/// One fit, labelled by where its data came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub asset: String,
    pub side: Side,
    pub window_index: i64,
    pub fit: FitResult,
}

/// Medians over the windows of one (asset, side) group.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub asset: String,
    pub side: Side,
    /// Windows with converged fits of both the gamma model and `headline`.
    pub n_windows: usize,
    /// Windows of the group not counted in `n_windows`.
    pub n_excluded: usize,
    pub headline: ModelId,
    /// Median `AIC_headline - AIC_gamma`.
    pub delta_aic: f64,
    /// Median `AIC_alt - AIC_gamma` per alternative, NaN if never paired.
    pub median_delta_aic: BTreeMap<ModelId, f64>,
    /// Median R² over converged fits per model, NaN if none.
    pub median_r2: BTreeMap<ModelId, f64>,
    /// Interquartile range of the headline ΔAIC.
    pub iqr_delta_aic: f64,
}

/// Linear-interpolation quantile (Hyndman–Fan type 7) of sorted data.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn iqr(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_type7(&v, 0.75) - quantile_type7(&v, 0.25)
}

fn deltas(
    windows: &BTreeMap<i64, BTreeMap<ModelId, &FitResult>>,
    alt: ModelId,
) -> Vec<f64> {
    windows
        .values()
        .filter_map(|fits| match (fits.get(&ModelId::IntGamma), fits.get(&alt)) {
            (Some(g), Some(a)) if g.converged && a.converged => Some(a.aic - g.aic),
            _ => None,
        })
        .collect()
}

/// Groups rows by (asset, side), sorted, and summarizes each group.
pub fn compare(rows: &[FitRow], headline: ModelId) -> Vec<ComparisonRow> {
    let mut groups: BTreeMap<(String, Side), BTreeMap<i64, BTreeMap<ModelId, &FitResult>>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.asset.clone(), r.side))
            .or_default()
            .entry(r.window_index)
            .or_default()
            .insert(r.fit.model, &r.fit);
    }
    groups
        .into_iter()
        .map(|((asset, side), windows)| {
            let head = deltas(&windows, headline);
            let median_delta_aic = ALTERNATIVES.iter().map(|&m| (m, median(&deltas(&windows, m)))).collect();
            let models: BTreeSet<ModelId> = windows.values().flat_map(|f| f.keys().copied()).collect();
            let median_r2 = ModelId::ALL
                .iter()
                .filter(|m| models.contains(m))
                .map(|&m| {
                    let r2: Vec<f64> = windows
                        .values()
                        .filter_map(|f| f.get(&m))
                        .filter(|f| f.converged && f.r2.is_finite())
                        .map(|f| f.r2)
                        .collect();
                    (m, median(&r2))
                })
                .collect();
            ComparisonRow {
                asset,
                side,
                n_windows: head.len(),
                n_excluded: windows.len() - head.len(),
                headline,
                delta_aic: median(&head),
                median_delta_aic,
                median_r2,
                iqr_delta_aic: iqr(&head),
            }
        })
        .collect()
}
