//! Log-gamma and the lower incomplete gamma function.

use super::SpecfunError;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_8;
const MAX_ITER: usize = 100_000;

/// `zeta(k) - 1` for `k = 2..=64`.
#[allow(clippy::excessive_precision)]
const ZETA_MINUS_ONE: [f64; 63] = [
    0.64493406684822643647,
    0.2020569031595942854,
    0.082323233711138191516,
    0.036927755143369926331,
    0.017343061984449139715,
    0.0083492773819228268398,
    0.0040773561979443393787,
    0.0020083928260822144179,
    0.00099457512781808533715,
    0.0004941886041194645587,
    0.00024608655330804829864,
    0.00012271334757848914675,
    0.000061248135058704829259,
    0.000030588236307020493552,
    0.000015282259408651871733,
    7.6371976378997622736e-6,
    3.8172932649998398565e-6,
    1.9082127165539389257e-6,
    9.5396203387279611315e-7,
    4.7693298678780646312e-7,
    2.3845050272773299e-7,
    1.1921992596531107307e-7,
    5.9608189051259479612e-8,
    2.9803503514652280186e-8,
    1.4901554828365041235e-8,
    7.450711789835429492e-9,
    3.7253340247884570548e-9,
    1.8626597235130490064e-9,
    9.3132743241966818287e-10,
    4.656629065033784073e-10,
    2.328311833676505492e-10,
    1.1641550172700519776e-10,
    5.8207720879027008892e-11,
    2.9103850444970996869e-11,
    1.4551921891041984236e-11,
    7.2759598350574810145e-12,
    3.6379795473786511902e-12,
    1.8189896503070659476e-12,
    9.0949478402638892825e-13,
    4.5474737830421540268e-13,
    2.2737368458246525152e-13,
    1.1368684076802278493e-13,
    5.6843419876275856093e-14,
    2.8421709768893018555e-14,
    1.421085482803160677e-14,
    7.1054273952108527129e-15,
    3.5527136913371136733e-15,
    1.7763568435791203275e-15,
    8.8817842109308159031e-16,
    4.4408921031438133642e-16,
    2.220446050798041984e-16,
    1.1102230251410661337e-16,
    5.5511151248454812437e-17,
    2.7755575621361241726e-17,
    1.3877787809725232763e-17,
    6.9388939045441536974e-18,
    3.4694469521659226247e-18,
    1.734723476047576572e-18,
    8.6736173801199337283e-19,
    4.3368086900206504875e-19,
    2.168404344997219785e-19,
    1.0842021724942414063e-19,
    5.4210108624566454109e-20,
];

/// `ln Γ(1 + x)` for `|x| <= 0.25`.
fn ln_gamma_1p(x: f64) -> f64 {
    // -γx + Σ (-1)^k ζ(k) x^k / k
    let mut sum = 0.0;
    let mut pow = -x;
    for (i, zm1) in ZETA_MINUS_ONE.iter().enumerate() {
        let k = (i + 2) as f64;
        pow *= -x;
        sum += (1.0 + zm1) * pow / k;
    }
    -EULER_GAMMA * x + sum
}

/// `ln Γ(2 + x)` for `-0.75 <= x <= 1`.
fn ln_gamma_2p(x: f64) -> f64 {
    // (1-γ)x + Σ (-1)^k (ζ(k)-1) x^k / k
    let mut sum = 0.0;
    let mut pow = -x;
    for (i, zm1) in ZETA_MINUS_ONE.iter().enumerate() {
        let k = (i + 2) as f64;
        pow *= -x;
        sum += zm1 * pow / k;
    }
    (1.0 - EULER_GAMMA) * x + sum
}

/// Stirling series, accurate for `a >= 10`.
fn ln_gamma_stirling(a: f64) -> f64 {
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let inv = 1.0 / a;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    for &c in C.iter().rev() {
        corr = corr * inv2 + c;
    }
    (a - 0.5) * a.ln() - a + HALF_LN_2PI + corr * inv
}

/// Natural log of Γ(a) for `a > 0`.
pub fn log_gamma(a: f64) -> Result<f64, SpecfunError> {
    if !(a > 0.0) || a.is_infinite() {
        return Err(SpecfunError::Domain("log_gamma requires finite a > 0"));
    }
    Ok(if a < 0.25 {
        ln_gamma_1p(a) - a.ln()
    } else if a < 0.75 {
        ln_gamma_2p(a - 1.0) - a.ln()
    } else if a <= 1.25 {
        ln_gamma_1p(a - 1.0)
    } else if a <= 3.0 {
        ln_gamma_2p(a - 2.0)
    } else if a < 10.0 {
        let mut shifted = a;
        let mut prod = 1.0;
        while shifted < 10.0 {
            prod *= shifted;
            shifted += 1.0;
        }
        ln_gamma_stirling(shifted) - prod.ln()
    } else {
        ln_gamma_stirling(a)
    })
}

fn check_args(a: f64, z: f64) -> Result<(), SpecfunError> {
    if !(a > 0.0) || a.is_infinite() {
        return Err(SpecfunError::Domain("incomplete gamma requires finite a > 0"));
    }
    if !(z >= 0.0) {
        return Err(SpecfunError::Domain("incomplete gamma requires z >= 0"));
    }
    Ok(())
}

/// `Σ z^n / (a (a+1) ... (a+n))`, valid for `z < a + 1`.
fn lower_series(a: f64, z: f64) -> Result<f64, SpecfunError> {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= z / ap;
        sum += term;
        if term < sum * f64::EPSILON * 0.5 {
            return Ok(sum);
        }
    }
    Err(SpecfunError::NonConvergence("incomplete gamma series"))
}

/// Continued fraction for `Γ(a, z) e^z z^-a`, modified Lentz, `z >= a + 1`.
fn upper_continued_fraction(a: f64, z: f64) -> Result<f64, SpecfunError> {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            return Ok(h);
        }
    }
    Err(SpecfunError::NonConvergence("incomplete gamma continued fraction"))
}

/// `ln γ(a, z)`; `-inf` at `z = 0`.
pub fn ln_lower_incomplete_gamma(a: f64, z: f64) -> Result<f64, SpecfunError> {
    check_args(a, z)?;
    if z == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if z.is_infinite() {
        return log_gamma(a);
    }
    if z < a + 1.0 {
        Ok(a * z.ln() - z + lower_series(a, z)?.ln())
    } else {
        let lg = log_gamma(a)?;
        let cf = upper_continued_fraction(a, z)?;
        let q = (a * z.ln() - z - lg).exp() * cf;
        Ok(lg + (-q).ln_1p())
    }
}

/// `γ(a, z) = ∫_0^z t^(a-1) e^(-t) dt`.
pub fn lower_incomplete_gamma(a: f64, z: f64) -> Result<f64, SpecfunError> {
    ln_lower_incomplete_gamma(a, z).map(f64::exp)
}

/// Regularized `P(a, z) = γ(a, z) / Γ(a)`.
pub fn regularized_lower_gamma(a: f64, z: f64) -> Result<f64, SpecfunError> {
    Ok((ln_lower_incomplete_gamma(a, z)? - log_gamma(a)?).exp().min(1.0))
}
