//! Per-country shares of articles with heavy reuse or a flag, and
//! per-author flag histograms.

use textreuse::analytics::{
    author_flag_histogram, author_profiles, country_inputs, country_metrics, CountryMetric,
    DEFAULT_MIN_AUTHOR_ARTICLES, DEFAULT_MIN_COUNTRY_ARTICLES,
};
use textreuse::classify::{flag_all, qualifying_modes, FlagPolicy, ReuseContext, ReuseMode};
use textreuse::corpus::IngestOptions;
use textreuse::fingerprint::{fingerprint_document, FingerprintConfig};
use textreuse::index::{InsertMode, PostingsIndex};
use textreuse::synth::{random_corpus, store_from, CorpusSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = CorpusSpec { seed: 9, n_docs: 600, n_authors: 100, copy_rate: 0.3, copy_len: (50, 400), ..Default::default() };
    let store = store_from(&random_corpus(&spec), &IngestOptions::default());
    let cfg = FingerprintConfig::default();
    let mut index = PostingsIndex::new(cfg);
    for doc in store.iter() {
        index.add_document(&fingerprint_document(doc, &cfg), doc, InsertMode::Insert)?;
    }
    let commons = index.compute_common_hashes(4);
    let ctx = ReuseContext::new(&store, &index, &commons);
    let decisions = flag_all(&ctx, &FlagPolicy::default())?;

    let inputs = country_inputs(&ctx, &decisions)?;
    for metric in [CountryMetric::FracAbove20, CountryMetric::FracAbove50, CountryMetric::LinkMeasure] {
        println!("{}:", metric.name());
        for row in country_metrics(&inputs, metric, DEFAULT_MIN_COUNTRY_ARTICLES, 0) {
            println!("  {} {:.3} ({} articles, {} authors)", row.country, row.flagged_share, row.n_articles, row.n_authors);
        }
    }

    let profiles = author_profiles(&store, &qualifying_modes(&decisions), DEFAULT_MIN_AUTHOR_ARTICLES);
    println!("{} authors with at least {DEFAULT_MIN_AUTHOR_ARTICLES} articles", profiles.len());
    for mode in ReuseMode::ALL {
        let h = author_flag_histogram(&profiles, mode, DEFAULT_MIN_AUTHOR_ARTICLES);
        println!("  {mode}: {} with any flagged article, {} with a quarter or more", h.value_at(1e-9), h.value_at(0.25));
    }
    Ok(())
}
