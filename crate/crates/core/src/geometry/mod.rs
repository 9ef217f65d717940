//! Per-window liquidity profiles and the shear/drift observables built on them.
//!
//! Time is cut into non-overlapping windows anchored at the session open.
//! Each window gets the averaged quote mid `p*`, and every visible level is
//! binned into a tick offset from `p*`. Per-offset sizes are averaged over the
//! window's snapshots and accumulated into `Q_bid(x)`, `Q_ask(x)` for
//! `x = 1..K`.

mod center;
mod io;
mod shear;

use std::collections::BTreeMap;
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decimal::{Decimal, ExactPrice};
use crate::ingest::{BookSnapshot, SessionFilter, TimestampNs};

pub use center::{center_decomposition, window_measure, CenteredDensity};
pub use io::{read_profiles, read_shear_csv, write_profiles, write_shear_csv, ProfileSet, ShearRow};
pub use shear::{drift_series, median, shear_field, ShearRecord};

const NS_PER_SEC: i64 = 1_000_000_000;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid window spec: {0}")]
    InvalidSpec(String),
    #[error("window has no snapshots")]
    EmptyWindow,
    #[error("measure has no mass")]
    EmptyMeasure,
    #[error("snapshots mix symbols `{0}` and `{1}`")]
    MixedSymbols(String, String),
    #[error("profile file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Window length, tick depth and tick size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub duration_ns: i64,
    pub k: usize,
    pub tick_size: Decimal,
}

impl WindowSpec {
    pub fn new(duration_ns: i64, k: usize, tick_size: Decimal) -> Result<Self, GeometryError> {
        if duration_ns <= 0 {
            return Err(GeometryError::InvalidSpec("duration must be > 0".into()));
        }
        if k == 0 {
            return Err(GeometryError::InvalidSpec("K must be >= 1".into()));
        }
        if !tick_size.is_positive() {
            return Err(GeometryError::InvalidSpec("tick size must be > 0".into()));
        }
        Ok(WindowSpec { duration_ns, k, tick_size })
    }

    /// 10 s windows, 50 ticks, one-cent tick.
    pub fn standard() -> Self {
        WindowSpec {
            duration_ns: 10 * NS_PER_SEC,
            k: 50,
            tick_size: Decimal::from_raw(1_000_000),
        }
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self::standard()
    }
}

/// Parses durations like `10s`, `500ms`, `2m`, `1h` or a bare number of seconds.
pub fn parse_duration(s: &str) -> Result<i64, GeometryError> {
    let s = s.trim();
    let bad = || GeometryError::InvalidSpec(format!("cannot parse duration `{s}`"));
    let split = s.find(|c: char| c.is_ascii_alphabetic()).unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let per_unit: i64 = match unit {
        "" | "s" => NS_PER_SEC,
        "ms" => 1_000_000,
        "us" => 1_000,
        "ns" => 1,
        "m" | "min" => 60 * NS_PER_SEC,
        "h" => 3600 * NS_PER_SEC,
        _ => return Err(bad()),
    };
    let value = Decimal::from_str(num).map_err(|_| bad())?;
    // value is scaled by 1e8; per_unit divides evenly except for sub-ns input
    let ns = value.raw() as i128 * per_unit as i128;
    let scale = crate::decimal::SCALE as i128;
    if ns % scale != 0 {
        return Err(bad());
    }
    let ns = i64::try_from(ns / scale).map_err(|_| bad())?;
    if ns <= 0 {
        return Err(bad());
    }
    Ok(ns)
}

/// Cumulative two-sided depth profile of one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowProfile {
    pub window_index: i64,
    pub t_start: TimestampNs,
    pub t_end: TimestampNs,
    /// Window-averaged quote mid, exact.
    pub mid: ExactPrice,
    pub n_snapshots: usize,
    pub q_bid: Vec<f64>,
    pub q_ask: Vec<f64>,
    /// Next window's mid minus this one; absent for the last window of a
    /// session day.
    pub drift: Option<ExactPrice>,
}

/// `½(mean best ask + mean best bid)` over the snapshots, exactly.
pub fn window_mid(snapshots: &[BookSnapshot]) -> Result<ExactPrice, GeometryError> {
    mid_of(snapshots.iter())
}

fn mid_of<'a>(snapshots: impl Iterator<Item = &'a BookSnapshot>) -> Result<ExactPrice, GeometryError> {
    let mut sum: i128 = 0;
    let mut n: i128 = 0;
    for s in snapshots {
        if let (Some(b), Some(a)) = (s.best_bid(), s.best_ask()) {
            sum += a.raw() as i128 + b.raw() as i128;
            n += 1;
        }
    }
    if n == 0 {
        return Err(GeometryError::EmptyWindow);
    }
    Ok(ExactPrice::from_scaled_ratio(sum, 2 * n))
}

/// Tick offset of a level at `price`, or None if it falls at or through the
/// mid or beyond `k`.
///
/// `distance = (price - mid)` for asks and `(mid - price)` for bids, rounded
/// half away from zero in units of `tick`, all in integer arithmetic.
fn tick_offset(price: Decimal, mid: &ExactPrice, tick: Decimal, ask: bool, k: usize) -> Option<usize> {
    let n = mid.numer();
    let d = mid.denom();
    let scaled = price.raw() as i128 * d;
    let v = if ask { scaled - n } else { n - scaled };
    if v <= 0 {
        return None;
    }
    let q = d * tick.raw() as i128;
    let offset = (2 * v + q) / (2 * q);
    (offset >= 1 && offset <= k as i128).then_some(offset as usize)
}

/// Accumulates one window. Sizes stay integer until the final average so
/// that identical inputs give identical bits.
fn accumulate(snapshots: &[&BookSnapshot], mid: &ExactPrice, spec: &WindowSpec) -> (Vec<f64>, Vec<f64>) {
    let k = spec.k;
    let mut bid = vec![0i128; k];
    let mut ask = vec![0i128; k];
    for s in snapshots.iter() {
        for &(p, size) in &s.bids {
            if let Some(x) = tick_offset(p, mid, spec.tick_size, false, k) {
                bid[x - 1] += size.raw() as i128;
            }
        }
        for &(p, size) in &s.asks {
            if let Some(x) = tick_offset(p, mid, spec.tick_size, true, k) {
                ask[x - 1] += size.raw() as i128;
            }
        }
    }
    let n = snapshots.len() as f64;
    let finish = |raw: Vec<i128>| {
        let mut acc: i128 = 0;
        raw.into_iter()
            .map(|v| {
                acc += v;
                acc as f64 / crate::decimal::SCALE as f64 / n
            })
            .collect()
    };
    (finish(bid), finish(ask))
}

/// Bookkeeping from [`build_profiles`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileStats {
    pub snapshots_used: u64,
    /// One-sided or crossed snapshots and, with a session, snapshots outside it.
    pub snapshots_skipped: u64,
    /// Windows inside the observed range that received no snapshot.
    pub empty_windows: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot {
    index: i64,
    start: TimestampNs,
    end: TimestampNs,
    day: Option<NaiveDate>,
}

fn days_since_epoch(date: NaiveDate) -> i64 {
    (date - NaiveDate::from_ymd_opt(1970, 1, 1).expect("epoch")).num_days()
}

fn slot_of(ts: TimestampNs, spec: &WindowSpec, session: Option<&SessionFilter>) -> Option<Slot> {
    let dur = spec.duration_ns;
    match session {
        None => {
            let index = ts.div_euclid(dur);
            let start = index * dur;
            Some(Slot { index, start, end: start + dur, day: None })
        }
        Some(f) => {
            if !f.contains(ts) {
                return None;
            }
            let date = f.local_date(ts);
            let open = f.open_ns(date)?;
            let len = f.length_ns();
            let per_day = (len + dur - 1) / dur;
            let slot = (ts - open).div_euclid(dur);
            if slot < 0 || slot >= per_day {
                return None;
            }
            let start = open + slot * dur;
            Some(Slot {
                index: days_since_epoch(date) * per_day + slot,
                start,
                end: (start + dur).min(open + len),
                day: Some(date),
            })
        }
    }
}

/// Builds one profile per non-empty window.
///
/// Input must be time-sorted. Windows are processed in parallel; the output
/// is in window order and does not depend on the thread count.
pub fn build_profiles(
    snapshots: &[BookSnapshot],
    spec: &WindowSpec,
    session: Option<&SessionFilter>,
) -> Result<(Vec<WindowProfile>, ProfileStats), GeometryError> {
    let mut stats = ProfileStats::default();
    if let Some(first) = snapshots.first() {
        if let Some(other) = snapshots.iter().find(|s| s.symbol != first.symbol) {
            return Err(GeometryError::MixedSymbols(first.symbol.clone(), other.symbol.clone()));
        }
    }
    let mut groups: BTreeMap<i64, (Slot, Vec<usize>)> = BTreeMap::new();
    for (i, s) in snapshots.iter().enumerate() {
        if !s.is_usable() {
            stats.snapshots_skipped += 1;
            continue;
        }
        match slot_of(s.timestamp, spec, session) {
            Some(slot) => {
                groups.entry(slot.index).or_insert_with(|| (slot, Vec::new())).1.push(i);
                stats.snapshots_used += 1;
            }
            None => stats.snapshots_skipped += 1,
        }
    }
    let slots: Vec<(Slot, Vec<usize>)> = groups.into_values().collect();
    let mut profiles: Vec<WindowProfile> = slots
        .par_iter()
        .map(|(slot, members)| {
            let window: Vec<&BookSnapshot> = members.iter().map(|&i| &snapshots[i]).collect();
            let mid = mid_of(window.iter().copied()).expect("usable snapshots have both sides");
            let (q_bid, q_ask) = accumulate(&window, &mid, spec);
            WindowProfile {
                window_index: slot.index,
                t_start: slot.start,
                t_end: slot.end,
                mid,
                n_snapshots: window.len(),
                q_bid,
                q_ask,
                drift: None,
            }
        })
        .collect();
    for i in 1..slots.len() {
        let (prev, cur) = (&slots[i - 1].0, &slots[i].0);
        if prev.day == cur.day {
            stats.empty_windows += (cur.index - prev.index - 1) as u64;
            profiles[i - 1].drift = Some(profiles[i].mid - profiles[i - 1].mid);
        }
    }
    Ok((profiles, stats))
}
