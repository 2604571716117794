//! Corpus-level measurements over classified overlaps: distribution curves,
//! per-author and per-country rates, citation correlations and the overlap
//! network of selected authors.

mod authors;
mod citations;
mod countries;
mod curves;
mod network;
mod stats;

pub use authors::{author_flag_histogram, author_profiles, AuthorProfile, DEFAULT_MIN_AUTHOR_ARTICLES};
pub use citations::{
    bin_series, citation_dataset, citation_vs_reuse, source_citation_vs_reuse, Bin, CitationAnalysis,
    CitationFilter, CitationPoint, DEFAULT_BIN_COUNT,
};
pub use countries::{
    country_inputs, country_metrics, CountryInput, CountryMetric, CountryRow, DEFAULT_MIN_COUNTRY_ARTICLES,
};
pub use curves::{
    cumulative_overlap_distribution, reuse_fraction_distribution, reuse_fractions, Partition, ReuseFraction,
    StepCurve,
};
pub use network::{export_overlap_network, NetworkEdge, NetworkNode, OverlapNetwork};
pub use stats::{
    midranks, quantile_sorted, quartiles, spearman, spearman_with, CorrelationResult, PValueMethod, Quartiles,
    SpearmanOptions, T_APPROX_MIN_N,
};

use crate::classify::ClassifyError;

#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    #[error("input has no variation")]
    DegenerateInput,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unknown author `{0}`")]
    UnknownAuthor(String),
    #[error("network format error: {0}")]
    Format(String),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}
