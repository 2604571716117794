use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::curves::reuse_fractions;
use super::AnalyticsError;
use crate::classify::{FlagDecision, ReuseContext, ReuseVariant};

pub const DEFAULT_MIN_COUNTRY_ARTICLES: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountryMetric {
    /// Reuse fraction of at least 0.2.
    FracAbove20,
    /// Reuse fraction of at least 0.5.
    FracAbove50,
    /// Flagged by any qualifying pair.
    LinkMeasure,
}

impl CountryMetric {
    pub fn name(self) -> &'static str {
        match self {
            CountryMetric::FracAbove20 => "frac20",
            CountryMetric::FracAbove50 => "frac50",
            CountryMetric::LinkMeasure => "link",
        }
    }

    pub fn from_name(s: &str) -> Option<CountryMetric> {
        [CountryMetric::FracAbove20, CountryMetric::FracAbove50, CountryMetric::LinkMeasure]
            .into_iter()
            .find(|m| m.name() == s)
    }

    fn hit(self, input: &CountryInput) -> bool {
        match self {
            CountryMetric::FracAbove20 => input.fraction >= 0.2,
            CountryMetric::FracAbove50 => input.fraction >= 0.5,
            CountryMetric::LinkMeasure => input.flagged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryInput {
    pub doc_id: String,
    pub country: String,
    pub authors: Vec<String>,
    /// Fractional reuse counting common hashes.
    pub fraction: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryRow {
    pub country: String,
    pub flagged_share: f64,
    pub n_articles: usize,
    pub n_authors: usize,
}

/// Per-document inputs for the country table. `decisions` supplies the
/// flag state; documents without a decision count as unflagged.
pub fn country_inputs(
    ctx: &ReuseContext<'_>,
    decisions: &[FlagDecision],
) -> Result<Vec<CountryInput>, AnalyticsError> {
    let flagged: BTreeSet<&str> =
        decisions.iter().filter(|d| d.flag.is_some()).map(|d| d.doc_id.as_str()).collect();
    Ok(reuse_fractions(ctx, ReuseVariant::IncludeCommon)?
        .into_iter()
        .map(|f| {
            let doc = ctx.store.get(&f.doc_id).expect("fraction computed from store");
            CountryInput {
                country: doc.submitter_country.clone(),
                authors: doc.authors.clone(),
                flagged: flagged.contains(f.doc_id.as_str()),
                fraction: f.fraction,
                doc_id: f.doc_id,
            }
        })
        .collect())
}

/// Share of each country's articles meeting `metric`, in country order.
/// Countries with fewer than `min_articles` articles or `min_authors`
/// distinct authors are omitted.
pub fn country_metrics(
    inputs: &[CountryInput],
    metric: CountryMetric,
    min_articles: usize,
    min_authors: usize,
) -> Vec<CountryRow> {
    struct Acc<'a> {
        articles: usize,
        hits: usize,
        authors: BTreeSet<&'a str>,
    }
    let mut by_country: BTreeMap<&str, Acc> = BTreeMap::new();
    for input in inputs {
        let acc = by_country
            .entry(input.country.as_str())
            .or_insert_with(|| Acc { articles: 0, hits: 0, authors: BTreeSet::new() });
        acc.articles += 1;
        acc.hits += metric.hit(input) as usize;
        acc.authors.extend(input.authors.iter().map(String::as_str));
    }
    by_country
        .into_iter()
        .filter(|(_, a)| a.articles >= min_articles && a.authors.len() >= min_authors)
        .map(|(country, a)| CountryRow {
            country: country.to_string(),
            flagged_share: a.hits as f64 / a.articles as f64,
            n_articles: a.articles,
            n_authors: a.authors.len(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(country: &str, n: usize, reused: usize, fraction: f64) -> Vec<CountryInput> {
        (0..n)
            .map(|i| CountryInput {
                doc_id: format!("{country}{i}"),
                country: country.into(),
                authors: vec![format!("{country}-author{}", i % 7)],
                fraction: if i < reused { fraction } else { 0.0 },
                flagged: i < reused,
            })
            .collect()
    }

    #[test]
    fn small_countries_omitted() {
        let mut all = inputs("DE", 39, 10, 0.6);
        all.extend(inputs("FR", 40, 20, 0.6));
        let rows = country_metrics(&all, CountryMetric::FracAbove50, DEFAULT_MIN_COUNTRY_ARTICLES, 0);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].country, "FR");
        assert_eq!(rows[0].flagged_share, 0.5);
        assert_eq!(rows[0].n_authors, 7);
        assert!(country_metrics(&all, CountryMetric::FracAbove50, 40, 8).is_empty());
    }

    #[test]
    fn metrics_use_inclusive_cuts() {
        let mut all = inputs("GB", 4, 1, 0.5);
        all[1].fraction = 0.2;
        all[2].fraction = 0.19;
        let share = |m| country_metrics(&all, m, 1, 0)[0].flagged_share;
        assert_eq!(share(CountryMetric::FracAbove20), 0.5);
        assert_eq!(share(CountryMetric::FracAbove50), 0.25);
        assert_eq!(share(CountryMetric::LinkMeasure), 0.25);
        assert_eq!(CountryMetric::from_name("frac20"), Some(CountryMetric::FracAbove20));
    }
}
