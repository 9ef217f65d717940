use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{shear_field, GeometryError, ProfileStats, ShearRecord, WindowProfile, WindowSpec};
use crate::ingest::SessionFilter;

pub const PROFILE_FORMAT: &str = "shearbook-profiles";
pub const PROFILE_VERSION: u32 = 1;

/// Contents of a profiles JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSet {
    pub format: String,
    pub version: u32,
    pub symbol: String,
    pub spec: WindowSpec,
    pub session: Option<SessionFilter>,
    pub stats: ProfileStats,
    pub profiles: Vec<WindowProfile>,
}

impl ProfileSet {
    pub fn new(
        symbol: String,
        spec: WindowSpec,
        session: Option<SessionFilter>,
        stats: ProfileStats,
        profiles: Vec<WindowProfile>,
    ) -> Self {
        ProfileSet {
            format: PROFILE_FORMAT.into(),
            version: PROFILE_VERSION,
            symbol,
            spec,
            session,
            stats,
            profiles,
        }
    }

    /// Shear rows with the absolute drift attached.
    pub fn shear_rows(&self) -> Vec<ShearRow> {
        self.profiles.iter().map(ShearRow::from_profile).collect()
    }
}

pub fn write_profiles<W: Write>(mut out: W, set: &ProfileSet) -> Result<(), GeometryError> {
    serde_json::to_writer_pretty(&mut out, set).map_err(|e| GeometryError::Format(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_profiles<R: BufRead>(input: R) -> Result<ProfileSet, GeometryError> {
    let set: ProfileSet =
        serde_json::from_reader(input).map_err(|e| GeometryError::Format(e.to_string()))?;
    if set.format != PROFILE_FORMAT || set.version != PROFILE_VERSION {
        return Err(GeometryError::Format(format!(
            "expected {PROFILE_FORMAT} v{PROFILE_VERSION}, found {} v{}",
            set.format, set.version
        )));
    }
    let k = set.spec.k;
    if let Some(p) = set.profiles.iter().find(|p| p.q_bid.len() != k || p.q_ask.len() != k) {
        return Err(GeometryError::Format(format!(
            "window {} does not have {k} offsets",
            p.window_index
        )));
    }
    Ok(set)
}

/// One line of the shear CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ShearRow {
    pub window_index: i64,
    pub amplitude: f64,
    pub abs_drift: Option<f64>,
    pub sigma: Vec<f64>,
}

impl ShearRow {
    pub fn from_profile(p: &WindowProfile) -> Self {
        let ShearRecord { window_index, sigma, amplitude } = shear_field(p);
        ShearRow {
            window_index,
            amplitude,
            abs_drift: p.drift.map(|d| d.abs().to_f64()),
            sigma,
        }
    }
}

pub fn write_shear_csv<W: Write>(mut out: W, rows: &[ShearRow], k: usize) -> Result<(), GeometryError> {
    let mut header = String::from("window_index,A_T,abs_drift");
    for x in 1..=k {
        header.push_str(&format!(",sigma_{x}"));
    }
    writeln!(out, "{header}")?;
    for r in rows {
        let mut line = format!("{},{},", r.window_index, r.amplitude);
        if let Some(d) = r.abs_drift {
            line.push_str(&d.to_string());
        }
        for s in &r.sigma {
            line.push(',');
            line.push_str(&s.to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_shear_csv<R: BufRead>(input: R) -> Result<Vec<ShearRow>, GeometryError> {
    let mut lines = input.lines();
    let bad = |n: usize, m: &str| GeometryError::Format(format!("shear CSV line {n}: {m}"));
    let header = lines.next().ok_or_else(|| bad(1, "missing header"))??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.len() < 3 || cols[..3] != ["window_index", "A_T", "abs_drift"] {
        return Err(bad(1, "expected window_index,A_T,abs_drift,sigma_1,..."));
    }
    let k = cols.len() - 3;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != k + 3 {
            return Err(bad(n, &format!("expected {} fields, found {}", k + 3, f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(n, &format!("bad number `{s}`")));
        rows.push(ShearRow {
            window_index: f[0].parse().map_err(|_| bad(n, "bad window_index"))?,
            amplitude: num(f[1])?,
            abs_drift: if f[2].is_empty() { None } else { Some(num(f[2])?) },
            sigma: f[3..].iter().map(|s| num(s)).collect::<Result<_, _>>()?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decimal::ExactPrice;

    fn sample() -> ProfileSet {
        let p = |i: i64, drift: Option<i128>| WindowProfile {
            window_index: i,
            t_start: i * 10,
            t_end: i * 10 + 10,
            mid: ExactPrice::from_scaled_ratio(20_000_000_001, 2),
            n_snapshots: 3,
            q_bid: vec![0.1, 0.30000000000000004],
            q_ask: vec![1.0 / 3.0, 2.5],
            drift: drift.map(|d| ExactPrice::from_scaled_ratio(d, 3)),
        };
        ProfileSet::new(
            "SYN".into(),
            WindowSpec::new(10, 2, "0.01".parse().unwrap()).unwrap(),
            Some(SessionFilter::us_equities()),
            ProfileStats { snapshots_used: 6, snapshots_skipped: 1, empty_windows: 0 },
            vec![p(0, Some(-1_000_000)), p(1, None)],
        )
    }

    #[test]
    fn profiles_round_trip() {
        let set = sample();
        let mut buf = Vec::new();
        write_profiles(&mut buf, &set).unwrap();
        let back = read_profiles(buf.as_slice()).unwrap();
        assert_eq!(back, set);
        let mut again = Vec::new();
        write_profiles(&mut again, &back).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn shear_csv_round_trip() {
        let set = sample();
        let rows = set.shear_rows();
        let mut buf = Vec::new();
        write_shear_csv(&mut buf, &rows, 2).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("window_index,A_T,abs_drift,sigma_1,sigma_2\n"));
        assert!(text.lines().nth(2).unwrap().starts_with("1,") && text.lines().nth(2).unwrap().contains(",,"));
        assert_eq!(read_shear_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn rejects_wrong_format() {
        let mut set = sample();
        set.format = "other".into();
        let mut buf = Vec::new();
        write_profiles(&mut buf, &set).unwrap();
        assert!(read_profiles(buf.as_slice()).is_err());
        assert!(read_shear_csv("a,b\n".as_bytes()).is_err());
        assert!(read_shear_csv("window_index,A_T,abs_drift,sigma_1\n1,2,3\n".as_bytes()).is_err());
    }
}
