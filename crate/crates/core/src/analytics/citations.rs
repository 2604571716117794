use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::curves::reuse_fractions;
use super::stats::{quartiles, spearman_with, CorrelationResult, SpearmanOptions};
use super::AnalyticsError;
use crate::classify::{OverlapRecord, ReuseContext, ReuseMode, ReuseVariant};
use crate::corpus::DocKind;

pub const DEFAULT_BIN_COUNT: usize = 20;

/// One article in the citation study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationPoint {
    pub doc_id: String,
    pub kind: DocKind,
    pub country: String,
    /// Fractional reuse counting common hashes.
    pub fraction: f64,
    /// Citations from documents sharing no author.
    pub citations: usize,
}

/// Exclusion rules. Each is a pure predicate, so any order gives the same set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CitationFilter {
    ExcludeReview,
    /// Drop articles with `fraction >= cut`.
    ExcludeDuplicates(f64),
    /// Drop articles with `fraction < cut`.
    ExcludeLowReuse(f64),
    /// Keep only articles whose submitter is in one of these countries.
    Countries(BTreeSet<String>),
}

impl CitationFilter {
    /// The standard exclusions at the given cuts.
    pub fn standard(duplicate_cut: f64, conversion_cut: f64) -> Vec<CitationFilter> {
        vec![
            CitationFilter::ExcludeReview,
            CitationFilter::ExcludeDuplicates(duplicate_cut),
            CitationFilter::ExcludeLowReuse(conversion_cut),
        ]
    }

    pub fn keeps(&self, p: &CitationPoint) -> bool {
        match self {
            CitationFilter::ExcludeReview => p.kind != DocKind::ReviewType,
            CitationFilter::ExcludeDuplicates(cut) => p.fraction < *cut,
            CitationFilter::ExcludeLowReuse(cut) => p.fraction >= *cut,
            CitationFilter::Countries(set) => set.contains(&p.country),
        }
    }
}

/// Articles with their reuse fraction and external citation count, after
/// applying `filters` in the order given.
pub fn citation_dataset(
    ctx: &ReuseContext<'_>,
    filters: &[CitationFilter],
) -> Result<Vec<CitationPoint>, AnalyticsError> {
    let counts = ctx.store.citation_counts();
    let mut points: Vec<CitationPoint> = reuse_fractions(ctx, ReuseVariant::IncludeCommon)?
        .into_iter()
        .map(|f| {
            let doc = ctx.store.get(&f.doc_id).expect("fraction computed from store");
            CitationPoint {
                country: doc.submitter_country.clone(),
                citations: counts.get(&f.doc_id).copied().unwrap_or(0),
                doc_id: f.doc_id,
                kind: f.kind,
                fraction: f.fraction,
            }
        })
        .collect();
    for f in filters {
        points.retain(|p| f.keeps(p));
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
    pub center: f64,
    pub count: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Equal-width bins over `[lo, hi]`; only nonempty bins are returned.
/// Values at `hi` land in the last bin.
pub fn bin_series(points: &[(f64, f64)], lo: f64, hi: f64, bin_count: usize) -> Vec<Bin> {
    let bin_count = bin_count.max(1);
    let width = (hi - lo) / bin_count as f64;
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); bin_count];
    for &(x, y) in points {
        let i = if width > 0.0 { ((x - lo) / width).floor() as isize } else { 0 };
        buckets[i.clamp(0, bin_count as isize - 1) as usize].push(y);
    }
    buckets
        .into_iter()
        .enumerate()
        .filter(|(_, ys)| !ys.is_empty())
        .map(|(index, ys)| {
            let q = quartiles(&ys);
            let b_lo = lo + width * index as f64;
            Bin {
                index,
                lo: b_lo,
                hi: b_lo + width,
                center: b_lo + width / 2.0,
                count: ys.len(),
                q1: q.q1,
                median: q.median,
                q3: q.q3,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationAnalysis {
    /// Scatter points `(x, citations)`.
    pub points: Vec<(f64, f64)>,
    pub bins: Vec<Bin>,
    /// Spearman over `(bin center, bin median)`.
    pub binned: CorrelationResult,
    /// Spearman over the raw points.
    pub raw: CorrelationResult,
}

fn analyse(
    points: Vec<(f64, f64)>,
    lo: f64,
    hi: f64,
    bin_count: usize,
    opts: &SpearmanOptions,
) -> Result<CitationAnalysis, AnalyticsError> {
    if points.len() < 3 {
        return Err(AnalyticsError::InsufficientData(format!("{} data points", points.len())));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let raw = spearman_with(&xs, &ys, opts)?;
    let bins = bin_series(&points, lo, hi, bin_count);
    if bins.len() < 3 {
        return Err(AnalyticsError::InsufficientData(format!("{} nonempty bins", bins.len())));
    }
    let centers: Vec<f64> = bins.iter().map(|b| b.center).collect();
    let medians: Vec<f64> = bins.iter().map(|b| b.median).collect();
    let binned = spearman_with(&centers, &medians, opts)?;
    Ok(CitationAnalysis { points, bins, binned, raw })
}

/// Median citations against reuse fraction, binned over `[0, 1]`.
pub fn citation_vs_reuse(
    dataset: &[CitationPoint],
    bin_count: usize,
    opts: &SpearmanOptions,
) -> Result<CitationAnalysis, AnalyticsError> {
    let points = dataset.iter().map(|p| (p.fraction, p.citations as f64)).collect();
    analyse(points, 0.0, 1.0, bin_count, opts)
}

/// Citations of each reused source against how much was taken from it.
///
/// One point per record: `(shared_uncommon, citations of the earlier
/// document)`. Common-author records are rejected. With `countries`, only
/// sources submitted from those countries are kept.
pub fn source_citation_vs_reuse(
    records: &[OverlapRecord],
    ctx: &ReuseContext<'_>,
    countries: Option<&BTreeSet<String>>,
    bin_count: usize,
    opts: &SpearmanOptions,
) -> Result<CitationAnalysis, AnalyticsError> {
    if let Some(r) = records.iter().find(|r| r.mode == ReuseMode::CommonAuthor) {
        return Err(AnalyticsError::Precondition(format!(
            "common-author record {} -> {} in source-citation input",
            r.earlier_id, r.later_id
        )));
    }
    let counts = ctx.store.citation_counts();
    let mut points = Vec::with_capacity(records.len());
    for r in records {
        let source = ctx.doc(&r.earlier_id)?;
        if countries.is_some_and(|c| !c.contains(&source.submitter_country)) {
            continue;
        }
        let cites = counts.get(&r.earlier_id).copied().unwrap_or(0);
        points.push((r.shared_uncommon as f64, cites as f64));
    }
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    analyse(points, lo, hi, bin_count, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(id: &str, kind: DocKind, country: &str, fraction: f64, citations: usize) -> CitationPoint {
        CitationPoint { doc_id: id.into(), kind, country: country.into(), fraction, citations }
    }

    #[test]
    fn bins_cover_unit_interval() {
        let pts = [(0.0, 1.0), (0.049, 3.0), (0.05, 5.0), (1.0, 7.0), (0.999, 9.0)];
        let bins = bin_series(&pts, 0.0, 1.0, 20);
        assert_eq!(bins.iter().map(|b| (b.index, b.count)).collect::<Vec<_>>(), vec![(0, 2), (1, 1), (19, 2)]);
        assert_eq!(bins[0].median, 2.0);
        assert!((bins[2].center - 0.975).abs() < 1e-12);
        assert_eq!((bins[2].q1, bins[2].q3), (7.5, 8.5));
    }

    #[test]
    fn decreasing_citations_give_negative_r() {
        let data: Vec<CitationPoint> = (0..60)
            .map(|i| {
                let f = 0.05 + 0.9 * i as f64 / 60.0;
                let noise = (i * 37 % 11) as f64 - 5.0;
                pt(&format!("d{i}"), DocKind::Normal, "US", f, (100.0 * (1.0 - f) + noise).max(0.0).round() as usize)
            })
            .collect();
        let a = citation_vs_reuse(&data, DEFAULT_BIN_COUNT, &SpearmanOptions::default()).unwrap();
        assert!(a.binned.r < -0.7, "{}", a.binned.r);
        assert!(a.raw.r < -0.7, "{}", a.raw.r);
        assert_eq!(a.bins.iter().map(|b| b.count).sum::<usize>(), 60);
    }

    #[test]
    fn identical_fractions_are_degenerate() {
        let data: Vec<CitationPoint> =
            (0..10).map(|i| pt(&format!("d{i}"), DocKind::Normal, "US", 0.3, i)).collect();
        assert!(matches!(
            citation_vs_reuse(&data, 20, &SpearmanOptions::default()),
            Err(AnalyticsError::DegenerateInput)
        ));
    }

    #[test]
    fn too_few_bins() {
        let data: Vec<CitationPoint> =
            (0..10).map(|i| pt(&format!("d{i}"), DocKind::Normal, "US", 0.3 + (i % 2) as f64 * 0.2, i)).collect();
        assert!(matches!(
            citation_vs_reuse(&data, 20, &SpearmanOptions::default()),
            Err(AnalyticsError::InsufficientData(_))
        ));
    }

    #[test]
    fn filters_are_order_independent() {
        let data = vec![
            pt("a", DocKind::Normal, "US", 0.5, 1),
            pt("b", DocKind::ReviewType, "US", 0.5, 1),
            pt("c", DocKind::Normal, "DE", 0.97, 1),
            pt("d", DocKind::Normal, "US", 0.01, 1),
            pt("e", DocKind::Normal, "FR", 0.3, 1),
        ];
        let mut filters = CitationFilter::standard(0.95, 0.05);
        filters.push(CitationFilter::Countries(BTreeSet::from(["US".to_string(), "DE".to_string()])));
        let apply = |order: &[usize]| {
            let mut v = data.clone();
            for &i in order {
                v.retain(|p| filters[i].keeps(p));
            }
            v.into_iter().map(|p| p.doc_id).collect::<Vec<_>>()
        };
        let reference = apply(&[0, 1, 2, 3]);
        assert_eq!(reference, vec!["a"]);
        for order in [[3, 2, 1, 0], [1, 3, 0, 2], [2, 0, 3, 1]] {
            assert_eq!(apply(&order), reference);
        }
    }
}
