//! Correlates citations with reuse: median citations per reuse bin, the
//! per-source variant, and a country-restricted rerun.

use std::collections::BTreeSet;

use textreuse::analytics::{
    citation_dataset, citation_vs_reuse, source_citation_vs_reuse, CitationFilter, SpearmanOptions, DEFAULT_BIN_COUNT,
};
use textreuse::classify::{scan_overlaps, FlagPolicy, ReuseContext, ReuseMode};
use textreuse::corpus::IngestOptions;
use textreuse::fingerprint::{fingerprint_document, FingerprintConfig};
use textreuse::index::{InsertMode, PostingsIndex};
use textreuse::synth::{citation_corpus, store_from};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let store = store_from(&citation_corpus(6, 80), &IngestOptions::default());
    let cfg = FingerprintConfig::default();
    let mut index = PostingsIndex::new(cfg);
    for doc in store.iter() {
        index.add_document(&fingerprint_document(doc, &cfg), doc, InsertMode::Insert)?;
    }
    let commons = index.compute_common_hashes(4);
    let ctx = ReuseContext::new(&store, &index, &commons);
    let policy = FlagPolicy::default();
    let opts = SpearmanOptions::default();

    let filters = CitationFilter::standard(policy.duplicate_cut, policy.conversion_cut);
    let data = citation_dataset(&ctx, &filters)?;
    let a = citation_vs_reuse(&data, DEFAULT_BIN_COUNT, &opts)?;
    println!("{} articles after filtering", data.len());
    println!("fraction bin  count      q1  median      q3");
    for b in &a.bins {
        println!("{:.3}        {:>5}  {:>6.2}  {:>6.2}  {:>6.2}", b.center, b.count, b.q1, b.median, b.q3);
    }
    println!("binned medians: r = {:.3}, p = {:.2e}; raw points: r = {:.3}", a.binned.r, a.binned.p, a.raw.r);

    let records: Vec<_> = scan_overlaps(&ctx, 10)?
        .into_iter()
        .filter(|r| r.mode != ReuseMode::CommonAuthor && r.shared_uncommon >= policy.threshold(r.mode))
        .collect();
    let src = source_citation_vs_reuse(&records, &ctx, None, DEFAULT_BIN_COUNT, &opts)?;
    println!("source citations vs amount reused: r = {:.3} over {} instances", src.binned.r, src.points.len());

    let countries: BTreeSet<String> = ["US", "DE", "FR"].map(String::from).into();
    let mut restricted = filters.clone();
    restricted.push(CitationFilter::Countries(countries));
    let c = citation_vs_reuse(&citation_dataset(&ctx, &restricted)?, DEFAULT_BIN_COUNT, &opts)?;
    println!("US/DE/FR only: r = {:.3} over {} articles", c.binned.r, c.points.len());
    Ok(())
}
