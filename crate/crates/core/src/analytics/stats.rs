//! Rank correlation and order statistics.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::AnalyticsError;

/// Sample size from which the t approximation replaces the permutation test.
pub const T_APPROX_MIN_N: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PValueMethod {
    TDistribution,
    Permutation { shuffles: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    /// Spearman rank correlation.
    pub r: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub n: usize,
    pub method: PValueMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpearmanOptions {
    pub permutations: usize,
    pub seed: u64,
}

impl Default for SpearmanOptions {
    fn default() -> Self {
        SpearmanOptions { permutations: 10_000, seed: 0x5eed }
    }
}

/// One-based ranks, ties sharing the mean of their positions.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Spearman rank correlation with a two-sided p-value.
///
/// Uses the Student-t approximation for `n >= 30` and a seeded permutation
/// test otherwise.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult, AnalyticsError> {
    spearman_with(xs, ys, &SpearmanOptions::default())
}

pub fn spearman_with(
    xs: &[f64],
    ys: &[f64],
    opts: &SpearmanOptions,
) -> Result<CorrelationResult, AnalyticsError> {
    if xs.len() != ys.len() {
        return Err(AnalyticsError::InsufficientData(format!(
            "paired samples differ in length ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 3 {
        return Err(AnalyticsError::InsufficientData(format!("need at least 3 points, got {n}")));
    }
    if xs.iter().any(|v| !v.is_finite()) || ys.iter().any(|v| !v.is_finite()) {
        return Err(AnalyticsError::InsufficientData("non-finite input".into()));
    }
    let all_tied = |v: &[f64]| v.iter().all(|x| *x == v[0]);
    if all_tied(xs) || all_tied(ys) {
        return Err(AnalyticsError::DegenerateInput);
    }
    let rx = midranks(xs);
    let ry = midranks(ys);
    let r = pearson(&rx, &ry);

    if n >= T_APPROX_MIN_N {
        let df = (n - 2) as f64;
        let p = if r.abs() >= 1.0 {
            f64::MIN_POSITIVE
        } else {
            let t = r * (df / (1.0 - r * r)).sqrt();
            let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
            (2.0 * dist.sf(t.abs())).clamp(f64::MIN_POSITIVE, 1.0)
        };
        return Ok(CorrelationResult { r, p, n, method: PValueMethod::TDistribution });
    }

    let shuffles = opts.permutations.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut perm = ry.clone();
    let observed = r.abs() - 1e-12;
    let mut extreme = 0usize;
    for _ in 0..shuffles {
        perm.shuffle(&mut rng);
        if pearson(&rx, &perm).abs() >= observed {
            extreme += 1;
        }
    }
    let p = (extreme + 1) as f64 / (shuffles + 1) as f64;
    Ok(CorrelationResult { r, p, n, method: PValueMethod::Permutation { shuffles } })
}

/// Linearly interpolated quantile of sorted data (the "type 7" rule).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

pub fn quartiles(values: &[f64]) -> Quartiles {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Quartiles {
        q1: quantile_sorted(&v, 0.25),
        median: quantile_sorted(&v, 0.5),
        q3: quantile_sorted(&v, 0.75),
    }
}
