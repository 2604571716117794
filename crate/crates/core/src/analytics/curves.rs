use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::classify::{fractional_reuse, OverlapRecord, ReuseContext, ReuseMode, ReuseVariant};
use crate::corpus::DocKind;

/// Non-increasing step function given by `(x, value)` breakpoints with
/// strictly increasing `x`. `value_at(x)` is the value of the first
/// breakpoint at or beyond `x`, and 0 past the last one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCurve {
    pub points: Vec<(f64, f64)>,
}

impl StepCurve {
    pub fn value_at(&self, x: f64) -> f64 {
        let i = self.points.partition_point(|p| p.0 < x);
        self.points.get(i).map_or(0.0, |p| p.1)
    }

    /// Complementary cumulative counts of `values`, scaled by `scale`:
    /// each breakpoint is a distinct value paired with `#{v >= x} * scale`.
    pub(crate) fn ccdf(values: &[f64], scale: f64) -> StepCurve {
        let mut v: Vec<f64> = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let mut points = Vec::new();
        let mut i = 0;
        while i < n {
            points.push((v[i], (n - i) as f64 * scale));
            let x = v[i];
            while i < n && v[i] == x {
                i += 1;
            }
        }
        StepCurve { points }
    }
}

/// Number of `mode` records sharing at least each threshold of uncommon grams.
///
/// Thresholds are `min_size`, then every distinct size present at which the
/// count drops, then a terminal `max + 1` with count 0. Records below
/// `min_size` are ignored; no qualifying records yields an empty curve.
pub fn cumulative_overlap_distribution(
    records: &[OverlapRecord],
    mode: ReuseMode,
    min_size: usize,
) -> Vec<(usize, usize)> {
    let sizes: Vec<usize> = records.iter().filter(|r| r.mode == mode).map(|r| r.shared_uncommon).collect();
    cumulative_counts(&sizes, min_size)
}

pub(crate) fn cumulative_counts(sizes: &[usize], min_size: usize) -> Vec<(usize, usize)> {
    let mut v: Vec<usize> = sizes.iter().copied().filter(|&s| s >= min_size).collect();
    if v.is_empty() {
        return Vec::new();
    }
    v.sort_unstable();
    let mut out = vec![(min_size, v.len())];
    for (i, &x) in v.iter().enumerate() {
        let at_least = v.len() - i;
        if (i == 0 || v[i - 1] != x) && out.last().is_some_and(|p| p.1 != at_least) {
            out.push((x, at_least));
        }
    }
    out.push((v[v.len() - 1] + 1, 0));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Partition {
    All,
    Review,
    NonReview,
}

impl Partition {
    pub fn includes(self, kind: DocKind) -> bool {
        match self {
            Partition::All => kind != DocKind::LargeCollaboration,
            Partition::Review => kind == DocKind::ReviewType,
            Partition::NonReview => kind == DocKind::Normal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuseFraction {
    pub doc_id: String,
    pub kind: DocKind,
    pub fraction: f64,
}

/// Fractional reuse of every indexed, non-collaboration document with a
/// nonempty fingerprint, in id order.
pub fn reuse_fractions(ctx: &ReuseContext<'_>, variant: ReuseVariant) -> Result<Vec<ReuseFraction>, AnalyticsError> {
    let mut out = Vec::new();
    for doc in ctx.store.iter() {
        if doc.kind == DocKind::LargeCollaboration || !ctx.index.contains(&doc.id) {
            continue;
        }
        match fractional_reuse(&doc.id, ctx, variant) {
            Ok(fraction) => out.push(ReuseFraction { doc_id: doc.id.clone(), kind: doc.kind, fraction }),
            Err(crate::classify::ClassifyError::EmptyFingerprint(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

/// Share of documents in `partition` whose reuse fraction is at least `x`.
pub fn reuse_fraction_distribution(fractions: &[ReuseFraction], partition: Partition) -> StepCurve {
    let vals: Vec<f64> =
        fractions.iter().filter(|f| partition.includes(f.kind)).map(|f| f.fraction).collect();
    if vals.is_empty() {
        return StepCurve { points: Vec::new() };
    }
    StepCurve::ccdf(&vals, 1.0 / vals.len() as f64)
}
