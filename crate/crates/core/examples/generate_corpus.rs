//! Writes a seeded synthetic corpus as JSONL.
//!
//! ```text
//! cargo run --example generate_corpus -- corpus.jsonl 500 42
//! ```
//!
//! The corpus mixes random documents with planted copies and a block of
//! sources, copiers and citers whose citations fall as reuse rises.

use std::io::Write;

use textreuse::synth::{citation_corpus, random_corpus, to_jsonl, CorpusSpec};

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "corpus.jsonl".into());
    let n_docs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(300);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);

    let mut records = random_corpus(&CorpusSpec { seed, n_docs, ..Default::default() });
    records.extend(citation_corpus(seed ^ 0xc17e, 60));
    let mut out = std::fs::File::create(&path)?;
    out.write_all(to_jsonl(&records).as_bytes())?;
    println!("wrote {} records to {path}", records.len());
    Ok(())
}
