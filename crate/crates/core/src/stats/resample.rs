use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::{check_pairs, ranks, spearman_rho, StatsError};
use crate::models::quantile_type7;
use crate::rng::{substream, TaskKind};

/// Resamples per random stream; each block has its own substream, so the
/// result is the same for any thread count.
const BOOT_BLOCK: usize = 1_000;
const PERM_BLOCK: usize = 10_000;
/// Largest n for which all n! permutations are enumerated on request.
pub const MAX_EXHAUSTIVE_N: usize = 10;
/// Below this n, [`PermutationMode::Auto`] enumerates.
pub const AUTO_EXHAUSTIVE_N: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapCi {
    pub lo: f64,
    pub hi: f64,
    /// Resamples with constant ranks on either side.
    pub skipped: usize,
}

/// Percentile bootstrap interval for Spearman's ρ, resampling index pairs.
///
/// `unit` separates the random streams of independent callers (e.g. one per
/// asset) under the same seed.
pub fn bootstrap_ci(
    xs: &[f64],
    ys: &[f64],
    b: usize,
    level: f64,
    seed: u64,
    unit: u32,
) -> Result<BootstrapCi, StatsError> {
    check_pairs(xs, ys)?;
    if b < 1000 {
        return Err(StatsError::InvalidArgument(format!("need B >= 1000, got {b}")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::InvalidArgument(format!("level {level} not in (0, 1)")));
    }
    let n = xs.len();
    let blocks = b.div_ceil(BOOT_BLOCK);
    let per_block: Vec<Vec<Option<f64>>> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = substream(seed, unit, TaskKind::Bootstrap, blk as u32);
            let count = BOOT_BLOCK.min(b - blk * BOOT_BLOCK);
            let mut rx = vec![0.0; n];
            let mut ry = vec![0.0; n];
            (0..count)
                .map(|_| {
                    for i in 0..n {
                        let j = rng.random_range(0..n);
                        rx[i] = xs[j];
                        ry[i] = ys[j];
                    }
                    spearman_rho(&rx, &ry).ok()
                })
                .collect()
        })
        .collect();
    let mut rhos: Vec<f64> = per_block.into_iter().flatten().flatten().collect();
    let skipped = b - rhos.len();
    if 2 * skipped > b {
        return Err(StatsError::TooFewValid { skipped, total: b });
    }
    rhos.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok(BootstrapCi {
        lo: quantile_type7(&rhos, tail),
        hi: quantile_type7(&rhos, 1.0 - tail),
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PermutationMode {
    /// Enumerate for n ≤ 7, sample otherwise.
    #[default]
    Auto,
    MonteCarlo,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermutationTest {
    pub p: f64,
    /// Permutations at least as extreme as the observed statistic.
    pub extreme: u64,
    /// Permutations evaluated (n! when exhaustive).
    pub evaluated: u64,
    pub exhaustive: bool,
}

/// Centered rank vectors and the product normalizer, so that
/// `ρ(π) = Σ cx_i cy_π(i) / norm`.
struct RankFrame {
    cx: Vec<f64>,
    cy: Vec<f64>,
    norm: f64,
}

impl RankFrame {
    fn new(xs: &[f64], ys: &[f64]) -> Result<Self, StatsError> {
        let center = |r: Vec<f64>| {
            let m = r.iter().sum::<f64>() / r.len() as f64;
            r.into_iter().map(|v| v - m).collect::<Vec<f64>>()
        };
        let cx = center(ranks(xs));
        let cy = center(ranks(ys));
        let sx: f64 = cx.iter().map(|v| v * v).sum();
        let sy: f64 = cy.iter().map(|v| v * v).sum();
        if sx == 0.0 || sy == 0.0 {
            return Err(StatsError::ConstantInput);
        }
        Ok(RankFrame { cx, cy, norm: (sx * sy).sqrt() })
    }

    fn rho(&self, perm: &[usize]) -> f64 {
        self.cx.iter().zip(perm).map(|(a, &j)| a * self.cy[j]).sum::<f64>() / self.norm
    }
}

/// Tolerance for "at least as extreme" so that ties with the observed
/// statistic survive rounding.
const EXTREME_TOL: f64 = 1e-12;

/// Two-sided permutation p-value `(1 + #{|ρ*| ≥ |ρ̂|}) / (n_perm + 1)`, or the
/// exact `#{|ρ*| ≥ |ρ̂|} / n!` when enumerating.
pub fn permutation_pvalue(
    xs: &[f64],
    ys: &[f64],
    n_perm: usize,
    seed: u64,
    unit: u32,
    mode: PermutationMode,
) -> Result<PermutationTest, StatsError> {
    check_pairs(xs, ys)?;
    let n = xs.len();
    let frame = RankFrame::new(xs, ys)?;
    let identity: Vec<usize> = (0..n).collect();
    let threshold = frame.rho(&identity).abs() - EXTREME_TOL;
    let exhaustive = match mode {
        PermutationMode::Auto => n <= AUTO_EXHAUSTIVE_N,
        PermutationMode::Exhaustive => {
            if n > MAX_EXHAUSTIVE_N {
                return Err(StatsError::InvalidArgument(format!(
                    "exhaustive mode supports n <= {MAX_EXHAUSTIVE_N}, got {n}"
                )));
            }
            true
        }
        PermutationMode::MonteCarlo => false,
    };
    if exhaustive {
        let mut extreme = 0u64;
        let mut evaluated = 0u64;
        for_each_permutation(n, |perm| {
            evaluated += 1;
            if frame.rho(perm).abs() >= threshold {
                extreme += 1;
            }
        });
        return Ok(PermutationTest {
            p: extreme as f64 / evaluated as f64,
            extreme,
            evaluated,
            exhaustive: true,
        });
    }
    if n_perm < 10_000 {
        return Err(StatsError::InvalidArgument(format!("need n_perm >= 10000, got {n_perm}")));
    }
    let blocks = n_perm.div_ceil(PERM_BLOCK);
    let extreme: u64 = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let mut rng = substream(seed, unit, TaskKind::Permutation, blk as u32);
            let count = PERM_BLOCK.min(n_perm - blk * PERM_BLOCK);
            let mut perm = identity.clone();
            (0..count)
                .filter(|_| {
                    perm.shuffle(&mut rng);
                    frame.rho(&perm).abs() >= threshold
                })
                .count() as u64
        })
        .sum();
    Ok(PermutationTest {
        p: (1 + extreme) as f64 / (n_perm + 1) as f64,
        extreme,
        evaluated: n_perm as u64,
        exhaustive: false,
    })
}

/// Heap's algorithm over all permutations of `0..n`.
pub fn for_each_permutation<F: FnMut(&[usize])>(n: usize, mut f: F) {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&a);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn heap_enumerates_every_permutation_once() {
        let mut seen = std::collections::BTreeSet::new();
        for_each_permutation(5, |p| {
            seen.insert(p.to_vec());
        });
        assert_eq!(seen.len(), 120);
        let mut one = 0;
        for_each_permutation(1, |_| one += 1);
        assert_eq!(one, 1);
    }

    #[test]
    fn monotone_data_gives_degenerate_interval() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x + 1.0).collect();
        let ci = bootstrap_ci(&xs, &ys, 2000, 0.95, 1, 0).unwrap();
        assert_eq!((ci.lo, ci.hi), (1.0, 1.0));
    }

    #[test]
    fn independent_data_interval_straddles_zero() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let xs: Vec<f64> = (0..200).map(|_| rng.random()).collect();
        let ys: Vec<f64> = (0..200).map(|_| rng.random()).collect();
        let ci = bootstrap_ci(&xs, &ys, 2000, 0.95, 3, 0).unwrap();
        assert!(ci.lo < 0.0 && ci.hi > 0.0, "{ci:?}");
        assert_eq!(ci, bootstrap_ci(&xs, &ys, 2000, 0.95, 3, 0).unwrap());
        assert_ne!(ci, bootstrap_ci(&xs, &ys, 2000, 0.95, 4, 0).unwrap());
    }

    #[test]
    fn mostly_constant_resamples_fail() {
        // a resample is constant on one side with probability 17/27
        let xs = [2.0, 1.0, 1.0];
        let ys = [1.0, 1.0, 2.0];
        assert!(matches!(bootstrap_ci(&xs, &ys, 1000, 0.95, 0, 0), Err(StatsError::TooFewValid { .. })));
        assert!(bootstrap_ci(&ys, &xs, 999, 0.95, 0, 0).is_err());
    }

    #[test]
    fn monotone_permutation_p_is_minimal() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let t = permutation_pvalue(&xs, &xs, 100_000, 5, 0, PermutationMode::Auto).unwrap();
        assert!(t.p <= 3.0 / 100_001.0, "{t:?}");
    }

    #[test]
    fn exhaustive_n5_matches_manual_enumeration() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = [2.0, 5.0, 1.0, 4.0, 3.0];
        let t = permutation_pvalue(&xs, &ys, 0, 0, 0, PermutationMode::Auto).unwrap();
        assert!(t.exhaustive);
        assert_eq!(t.evaluated, 120);
        // oracle: count all orderings of ys by direct ρ computation
        let obs = spearman_rho(&xs, &ys).unwrap().abs();
        let mut count = 0;
        for_each_permutation(5, |p| {
            let perm: Vec<f64> = p.iter().map(|&i| ys[i]).collect();
            if spearman_rho(&xs, &perm).unwrap().abs() >= obs - 1e-12 {
                count += 1;
            }
        });
        assert_eq!(t.extreme, count);
    }

    #[test]
    fn constant_input_is_rejected() {
        let xs = [3.0; 6];
        let ys = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(
            permutation_pvalue(&xs, &ys, 10_000, 0, 0, PermutationMode::MonteCarlo),
            Err(StatsError::ConstantInput)
        );
        assert!(permutation_pvalue(&ys, &ys, 10, 0, 0, PermutationMode::MonteCarlo).is_err());
    }

    #[test]
    fn exhaustive_and_sampled_agree() {
        let xs = [0.3, 1.2, 0.7, 2.5, 1.9, 0.1, 3.3, 2.2, 1.0];
        let ys = [1.0, 0.4, 1.1, 2.0, 0.2, 0.9, 2.8, 1.5, 2.4];
        let ex = permutation_pvalue(&xs, &ys, 0, 0, 0, PermutationMode::Exhaustive).unwrap();
        assert_eq!(ex.evaluated, 362_880);
        let mc = permutation_pvalue(&xs, &ys, 100_000, 3, 0, PermutationMode::MonteCarlo).unwrap();
        let se = (ex.p * (1.0 - ex.p) / 100_000.0).sqrt();
        assert!((mc.p - ex.p).abs() <= 3.0 * se + 1.0 / 100_001.0, "{ex:?} {mc:?}");
        assert!(permutation_pvalue(&[0.0; 11], &[0.0; 11], 0, 0, 0, PermutationMode::Exhaustive).is_err());
    }
}
