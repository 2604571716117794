//! Parses corpus records, shows tokenization with quoted spans, reference
//! stripping and document-kind detection.

use std::io::Cursor;

use textreuse::corpus::{ingest_jsonl, strip_references, tokenize, DocumentStore, IngestOptions};

const CORPUS: &str = r#"{"id":"1001.0001","text":"We extend the method. As noted, \"the bound is tight in general\" for convex costs.\n\nReferences\n[1] A. Author, Some Journal (1999).","authors":["Ana Núñez","Bo Li"],"date":"2010-01-04","submitter_email":"ana@uni.es","citations":["0909.1234"]}
{"id":"1001.0002","title":"Lectures on lattice models","text":"These notes collect lectures given in spring.","authors":["Bo Li"],"date":"2010-01-05","comments":"lecture notes, 80 pages"}
{"id":"1001.0003","text":"Measurement of the top quark mass.","collaboration":"The Big Detector Collaboration","date":"2010-01-06T12:00:00Z"}
{"id":"1001.0004","text":"missing its date","authors":["Cy"]}
"#;

fn main() {
    let text = "Prior work states \u{201c}winnowing selects minima\u{201d} and so do we.";
    let ts = tokenize(text);
    println!("tokens: {:?}", ts.tokens);
    println!("quoted ranges: {:?}", ts.quote_mask);

    // Only a heading in the last 40% of the text counts.
    let article = "Body text of the article, long enough to precede the heading.\n\nBibliography\n[1] Cited work.";
    println!("after stripping references: {:?}", strip_references(article));
    println!("early heading kept: {:?}", strip_references("References\nare discussed below at some length."));

    let mut store = DocumentStore::default();
    let report = ingest_jsonl(Cursor::new(CORPUS), &IngestOptions::default(), &mut store).expect("in-memory read");
    println!("ingested {}, by kind {:?}", report.ingested, report.by_kind);
    for e in &report.errors {
        println!("line {}: {}", e.line, e.error);
    }
    for doc in store.iter() {
        println!(
            "{} kind={:?} authors={:?} country={} tokens={}",
            doc.id,
            doc.kind,
            doc.authors,
            doc.submitter_country,
            doc.tokens.len()
        );
    }
}
