//! Box-constrained Nelder–Mead.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmSettings {
    pub max_iter: usize,
    /// Relative spread of simplex values.
    pub ftol: f64,
    /// Absolute spread floor, for objectives that reach zero.
    pub fabs: f64,
    /// Largest vertex distance from the best vertex, per coordinate.
    pub xtol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn clamp(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for i in 0..x.len() {
        x[i] = x[i].clamp(lo[i], hi[i]);
    }
}

/// Minimizes `f` starting from `x0` with initial edge lengths `step`.
/// Every trial point is projected into `[lo, hi]`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: &[f64],
    lo: &[f64],
    hi: &[f64],
    s: &NmSettings,
) -> NmOutcome {
    let n = x0.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut start = x0.to_vec();
    clamp(&mut start, lo, hi);
    pts.push(start.clone());
    for i in 0..n {
        let mut p = start.clone();
        p[i] += step[i];
        if p[i] > hi[i] {
            p[i] = start[i] - step[i];
        }
        clamp(&mut p, lo, hi);
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p)).collect();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < s.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let spread = vals[n] - vals[0];
        let size = pts[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= s.ftol * vals[0].abs() + s.fabs && size <= s.xtol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for i in 0..n {
                centroid[i] += p[i] / n as f64;
            }
        }
        let towards = |t: f64| {
            let mut p: Vec<f64> = (0..n).map(|i| centroid[i] + t * (pts[n][i] - centroid[i])).collect();
            clamp(&mut p, lo, hi);
            p
        };
        let xr = towards(-1.0);
        let fr = eval(&xr);
        if fr < vals[0] {
            let xe = towards(-2.0);
            let fe = eval(&xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = towards(-0.5);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = towards(0.5);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for j in 1..=n {
            let mut p: Vec<f64> = (0..n).map(|i| pts[0][i] + 0.5 * (pts[j][i] - pts[0][i])).collect();
            clamp(&mut p, lo, hi);
            vals[j] = eval(&p);
            pts[j] = p;
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).expect("non-empty simplex");
    NmOutcome {
        x: pts[best].clone(),
        f: vals[best],
        iterations,
        converged,
    }
}
