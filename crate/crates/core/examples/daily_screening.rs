//! Screens a day's submissions against an existing index, one batch at a
//! time, as a submission system would.

use std::time::Instant;

use textreuse::classify::{screen_batch, FlagPolicy, ScreenOptions, ScreenState};
use textreuse::corpus::{Document, DocumentStore, IngestOptions};
use textreuse::fingerprint::{fingerprint_document, FingerprintConfig};
use textreuse::index::{InsertMode, PostingsIndex};
use textreuse::synth::{random_corpus, store_from, CorpusSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Three days of submissions; about 3% copy earlier text.
    let spec = CorpusSpec { seed: 5, n_docs: 3000, n_authors: 2000, copy_rate: 0.03, docs_per_day: 1000, ..Default::default() };
    let all = store_from(&random_corpus(&spec), &IngestOptions::default());
    let docs: Vec<Document> = all.chronological().into_iter().cloned().collect();
    let (history, today) = docs.split_at(2000);

    let cfg = FingerprintConfig::default();
    let mut store = DocumentStore::default();
    let mut index = PostingsIndex::new(cfg);
    for d in history {
        index.add_document(&fingerprint_document(d, &cfg), d, InsertMode::Insert)?;
        store.insert(d.clone())?;
    }
    let mut commons = index.compute_common_hashes(4);

    let start = Instant::now();
    let report = screen_batch(
        today.to_vec(),
        &mut ScreenState { store: &mut store, index: &mut index, commons: &mut commons },
        &FlagPolicy::default(),
        &ScreenOptions::default(),
    )?;
    println!(
        "screened {} submissions in {:.2?}: {} flagged, {} errors",
        report.screened,
        start.elapsed(),
        report.notes.len(),
        report.errors.len()
    );
    for note in &report.notes {
        println!("{}", note.render_text());
    }
    Ok(())
}
