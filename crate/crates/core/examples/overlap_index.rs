//! Builds a postings index, finds common (boilerplate) hashes, queries
//! overlaps and round-trips the index through its binary file format.

use textreuse::corpus::IngestOptions;
use textreuse::fingerprint::{fingerprint_document, FingerprintConfig};
use textreuse::index::{InsertMode, PostingsIndex, DEFAULT_COMPONENT_THRESHOLD};
use textreuse::synth::{random_corpus, store_from, CorpusSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = CorpusSpec { seed: 3, n_docs: 400, copy_rate: 0.3, boilerplate_rate: 0.05, ..Default::default() };
    let store = store_from(&random_corpus(&spec), &IngestOptions::default());
    let cfg = FingerprintConfig::default();
    let mut index = PostingsIndex::new(cfg);
    for doc in store.iter() {
        index.add_document(&fingerprint_document(doc, &cfg), doc, InsertMode::Insert)?;
    }
    println!(
        "{} docs, {} distinct hashes, {} postings, ~{} KiB",
        index.num_docs(),
        index.num_hashes(),
        index.total_postings(),
        index.memory_footprint() / 1024
    );

    let commons = index.compute_common_hashes(DEFAULT_COMPONENT_THRESHOLD);
    println!("{} common hashes (in >= {DEFAULT_COMPONENT_THRESHOLD} coauthor components)", commons.len());

    let (best, hits) = store
        .iter()
        .map(|d| (d.id.as_str(), index.query_overlaps(&d.id, 20, &commons).unwrap()))
        .max_by_key(|(_, hits)| hits.len())
        .expect("nonempty corpus");
    println!("{best} overlaps {} documents by at least 20 uncommon hashes:", hits.len());
    for (other, n) in hits.iter().take(5) {
        println!("  {other}: {n}");
    }

    let path = std::env::temp_dir().join("textreuse-example-index.bin");
    index.save(&path)?;
    let loaded = PostingsIndex::load(&path)?;
    println!("reloaded {} docs; identical bytes: {}", loaded.num_docs(), loaded.to_bytes() == index.to_bytes());
    std::fs::remove_file(&path)?;
    Ok(())
}
