//! Adaptive tanh-sinh quadrature.
//!
//! This is the independent check on the incomplete gamma routines: it shares
//! no code with them and tolerates integrable singularities at either end of
//! the interval.

use std::f64::consts::FRAC_PI_2;

use super::SpecfunError;

const MAX_LEVEL: u32 = 9;
const MIN_LEVEL: u32 = 4;
const MAX_PANELS: usize = 20_000;
const T_MAX: f64 = 6.5;

/// Distance from the nearer endpoint and weight (per unit half-width) of the
/// node at parameter `t >= 0`.
fn node(t: f64) -> (f64, f64) {
    let u = FRAC_PI_2 * t.sinh();
    let e = (2.0 * u).exp();
    let offset = 2.0 / (1.0 + e);
    let cu = u.cosh();
    let w = FRAC_PI_2 * t.cosh() / (cu * cu);
    (offset, w)
}

/// Returns (estimate, |difference between the last two levels|).
fn tanh_sinh_panel<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, target: f64) -> (f64, f64) {
    let r = 0.5 * (hi - lo);
    let mid = lo + r;
    let eval_pair = |t: f64| -> Option<f64> {
        let (offset, w) = node(t);
        if offset == 0.0 || w == 0.0 {
            return None;
        }
        let d = r * offset;
        let left = f(lo + d);
        let right = f(hi - d);
        let s = w * (left + right);
        s.is_finite().then_some(s)
    };
    // level 0: h = 1
    let mut sum = f(mid) * FRAC_PI_2;
    let mut k = 1;
    while (k as f64) <= T_MAX {
        match eval_pair(k as f64) {
            Some(s) => sum += s,
            None => break,
        }
        k += 1;
    }
    let mut h = 1.0;
    let mut estimate = r * h * sum;
    let mut diff = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut t = h;
        while t <= T_MAX {
            match eval_pair(t) {
                Some(s) => sum += s,
                None => break,
            }
            t += 2.0 * h;
        }
        let next = r * h * sum;
        diff = (next - estimate).abs();
        estimate = next;
        if level >= MIN_LEVEL && diff <= target.max(f64::EPSILON * estimate.abs()) {
            break;
        }
    }
    (estimate, diff)
}

/// `∫_lo^hi f(t) dt` with absolute error target `tol`.
///
/// Panels are bisected until each meets its share of `tol`, proportional to
/// its width.
pub fn quadrature_oracle<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64, SpecfunError> {
    if !(lo.is_finite() && hi.is_finite()) || !(tol > 0.0) {
        return Err(SpecfunError::Domain("quadrature needs finite bounds and tol > 0"));
    }
    if lo == hi {
        return Ok(0.0);
    }
    if hi < lo {
        return quadrature_oracle(f, hi, lo, tol).map(|v| -v);
    }
    let width = hi - lo;
    let mut stack = vec![(lo, hi)];
    let mut total = 0.0;
    let mut panels = 0;
    while let Some((a, b)) = stack.pop() {
        panels += 1;
        if panels > MAX_PANELS {
            return Err(SpecfunError::NonConvergence("quadrature panel budget exhausted"));
        }
        let share = tol * (b - a) / width;
        let (est, err) = tanh_sinh_panel(&f, a, b, share);
        let m = 0.5 * (a + b);
        // The rounding floor of a panel sum cannot be beaten by subdividing.
        if err <= share || err <= 8.0 * f64::EPSILON * est.abs() || m <= a || m >= b {
            total += est;
        } else {
            stack.push((m, b));
            stack.push((a, m));
        }
    }
    Ok(total)
}

/// Like [`quadrature_oracle`] with the tolerance relative to the integral's
/// own magnitude.
pub fn quadrature_relative<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Result<f64, SpecfunError> {
    let rough = quadrature_oracle(&f, lo, hi, f64::MAX)?;
    if rough == 0.0 {
        return Ok(0.0);
    }
    quadrature_oracle(&f, lo, hi, rel_tol * rough.abs())
}
