use serde::{Deserialize, Serialize};

use super::WindowProfile;

/// Shear field `Σ(x) = Q_ask(x) - Q_bid(x)` and its median amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShearRecord {
    pub window_index: i64,
    pub sigma: Vec<f64>,
    pub amplitude: f64,
}

/// Median with the even-count rule (mean of the two central values).
/// Returns NaN for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn shear_field(profile: &WindowProfile) -> ShearRecord {
    assert_eq!(profile.q_ask.len(), profile.q_bid.len(), "profile sides differ in length");
    let sigma: Vec<f64> = profile
        .q_ask
        .iter()
        .zip(&profile.q_bid)
        .map(|(a, b)| a - b)
        .collect();
    let abs: Vec<f64> = sigma.iter().map(|s| s.abs()).collect();
    ShearRecord {
        window_index: profile.window_index,
        amplitude: median(&abs),
        sigma,
    }
}

/// `(A_T, |Δp*_T|)` for every window with a successor.
pub fn drift_series(profiles: &[WindowProfile]) -> Vec<(f64, f64)> {
    profiles
        .iter()
        .filter_map(|p| p.drift.map(|d| (shear_field(p).amplitude, d.abs().to_f64())))
        .collect()
}
