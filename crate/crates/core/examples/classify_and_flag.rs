//! Classifies overlapping pairs as common-author, cited or uncited reuse,
//! applies the flag thresholds and prints admin notes.

use textreuse::classify::{flag_all, scan_overlaps, AdminNote, FlagPolicy, ReuseContext, ReuseMode};
use textreuse::corpus::IngestOptions;
use textreuse::fingerprint::{fingerprint_document, FingerprintConfig};
use textreuse::index::{InsertMode, PostingsIndex};
use textreuse::synth::{random_corpus, store_from, CorpusSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = CorpusSpec { seed: 4, n_docs: 300, n_authors: 80, copy_rate: 0.4, ..Default::default() };
    let store = store_from(&random_corpus(&spec), &IngestOptions::default());
    let cfg = FingerprintConfig::default();
    let mut index = PostingsIndex::new(cfg);
    for doc in store.iter() {
        index.add_document(&fingerprint_document(doc, &cfg), doc, InsertMode::Insert)?;
    }
    let commons = index.compute_common_hashes(4);
    let ctx = ReuseContext::new(&store, &index, &commons);

    let records = scan_overlaps(&ctx, 10)?;
    for mode in ReuseMode::ALL {
        let n = records.iter().filter(|r| r.mode == mode).count();
        println!("{mode}: {n} pairs with at least 10 shared uncommon 7-grams");
    }
    if let Some(r) = records.iter().find(|r| !r.annotations.is_empty()) {
        println!("annotated pair {} -> {}: {:?}", r.earlier_id, r.later_id, r.annotations);
    }

    let policy = FlagPolicy::default();
    let decisions = flag_all(&ctx, &policy)?;
    let notes: Vec<AdminNote> = decisions.iter().filter_map(AdminNote::from_decision).collect();
    println!(
        "{} of {} documents flagged (AU >= {}, CI/UN >= {})",
        notes.len(),
        decisions.len(),
        policy.au_threshold,
        policy.ci_threshold
    );
    for note in notes.iter().take(5) {
        println!("{}", note.render_text());
    }
    Ok(())
}
