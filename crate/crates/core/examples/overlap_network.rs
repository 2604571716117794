//! Exports the overlap networks of a sparse and a dense self-reuser as
//! Graphviz and JSON.
//!
//! ```text
//! cargo run --example overlap_network && dot -Tsvg author_b.dot > author_b.svg
//! ```

use std::collections::BTreeSet;

use textreuse::analytics::export_overlap_network;
use textreuse::classify::{scan_overlaps, FlagPolicy, ReuseContext};
use textreuse::corpus::IngestOptions;
use textreuse::fingerprint::{fingerprint_document, FingerprintConfig};
use textreuse::index::{InsertMode, PostingsIndex};
use textreuse::synth::{focal_author_corpus, store_from};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sparse: BTreeSet<usize> = [20, 50, 90, 130, 170, 200].into();
    let dense: BTreeSet<usize> = (1..40).collect();
    let mut records = focal_author_corpus(7, "Author A", 217, &sparse, 1, 500);
    records.extend(focal_author_corpus(8, "Author B", 40, &dense, 2, 500));
    let store = store_from(&records, &IngestOptions::default());

    let cfg = FingerprintConfig::default();
    let mut index = PostingsIndex::new(cfg);
    for doc in store.iter() {
        index.add_document(&fingerprint_document(doc, &cfg), doc, InsertMode::Insert)?;
    }
    let commons = index.compute_common_hashes(4);
    let overlaps = scan_overlaps(&ReuseContext::new(&store, &index, &commons), 10)?;

    for (author, file) in [("Author A", "author_a"), ("Author B", "author_b")] {
        let net = export_overlap_network(&[author.to_string()], &overlaps, &store, &FlagPolicy::default())?;
        std::fs::write(format!("{file}.dot"), net.to_dot())?;
        std::fs::write(format!("{file}.json"), net.to_json())?;
        println!(
            "{author}: {} own articles, {} edges, {:.3} edges per article -> {file}.dot",
            net.nodes.iter().filter(|n| n.owned).count(),
            net.edges.len(),
            net.edge_density()
        );
    }
    Ok(())
}
