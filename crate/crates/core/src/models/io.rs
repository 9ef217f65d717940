use std::io::{Read, Write};

use super::{ComparisonRow, FitResult, FitRow, ModelError, ModelId, ALTERNATIVES};

pub const FITS_HEADER: &str =
    "asset,side,window_index,model,converged,iterations,n_points,rss,r2,aic,p1,p2,p3";

pub const TABLE2_HEADER: &str = "asset,side,N_win,dAIC,dAIC_power,dAIC_exp,dAIC_lognormal,\
R2_gamma,R2_power,R2_exp,R2_lognormal,iqr_dAIC,N_excluded";

pub fn write_fits_csv<W: Write>(mut out: W, rows: &[FitRow]) -> std::io::Result<()> {
    writeln!(out, "{FITS_HEADER}")?;
    for r in rows {
        let f = &r.fit;
        let mut line = format!(
            "{},{},{},{},{},{},{},{},{},{}",
            r.asset, r.side, r.window_index, f.model, f.converged, f.iterations, f.n_points, f.rss, f.r2, f.aic
        );
        for i in 0..3 {
            line.push(',');
            if let Some(p) = f.params.get(i) {
                line.push_str(&p.to_string());
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum FitsCsvError {
    #[error("fits CSV line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub fn read_fits_csv<R: Read>(input: R) -> Result<Vec<FitRow>, FitsCsvError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != FITS_HEADER {
        return Err(FitsCsvError::Malformed { line: 1, reason: format!("expected header `{FITS_HEADER}`") });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |reason: String| FitsCsvError::Malformed { line, reason };
        let num = |i: usize| -> Result<f64, FitsCsvError> {
            rec[i].parse().map_err(|_| bad(format!("column {} is not a number: `{}`", i + 1, &rec[i])))
        };
        let model: ModelId = rec[3].parse().map_err(|e: ModelError| bad(e.to_string()))?;
        let mut params = Vec::new();
        for i in 10..10 + model.n_params() {
            params.push(num(i)?);
        }
        rows.push(FitRow {
            asset: rec[0].to_string(),
            side: rec[1].parse().map_err(|s| bad(format!("unknown side `{s}`")))?,
            window_index: rec[2].parse().map_err(|_| bad("bad window_index".into()))?,
            fit: FitResult {
                model,
                converged: rec[4].parse().map_err(|_| bad("bad converged flag".into()))?,
                iterations: rec[5].parse().map_err(|_| bad("bad iterations".into()))?,
                n_points: rec[6].parse().map_err(|_| bad("bad n_points".into()))?,
                rss: num(7)?,
                r2: num(8)?,
                aic: num(9)?,
                params,
                nonmonotone_input: false,
            },
        });
    }
    Ok(rows)
}

pub fn write_table2_csv<W: Write>(mut out: W, rows: &[ComparisonRow]) -> std::io::Result<()> {
    writeln!(out, "{TABLE2_HEADER}")?;
    let get = |m: &std::collections::BTreeMap<ModelId, f64>, id: ModelId| m.get(&id).copied().unwrap_or(f64::NAN);
    for r in rows {
        let mut line = format!("{},{},{},{}", r.asset, r.side, r.n_windows, r.delta_aic);
        for alt in ALTERNATIVES {
            line.push_str(&format!(",{}", get(&r.median_delta_aic, alt)));
        }
        for m in ModelId::ALL {
            line.push_str(&format!(",{}", get(&r.median_r2, m)));
        }
        line.push_str(&format!(",{},{}", r.iqr_delta_aic, r.n_excluded));
        writeln!(out, "{line}")?;
    }
    Ok(())
}
