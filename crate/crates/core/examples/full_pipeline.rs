//! Runs every pipeline stage on a generated corpus, then screens a new
//! batch, writing all outputs under a directory.
//!
//! ```text
//! cargo run --example full_pipeline -- /tmp/textreuse-demo
//! ```

use textreuse::config::RunConfig;
use textreuse::pipeline::{cmd_export_network, cmd_screen, run_all, ReportOptions};
use textreuse::synth::{citation_corpus, random_corpus, to_jsonl, CorpusSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "textreuse-demo".into()));
    std::fs::create_dir_all(&root)?;

    let mut records = random_corpus(&CorpusSpec { seed: 10, n_docs: 400, ..Default::default() });
    let batch = records.split_off(350);
    records.extend(citation_corpus(11, 60));
    std::fs::write(root.join("corpus.jsonl"), to_jsonl(&records))?;
    std::fs::write(root.join("batch.jsonl"), to_jsonl(&batch))?;

    let cfg = RunConfig { corpus: Some(root.join("corpus.jsonl")), out_dir: root.join("out"), ..RunConfig::default() };
    for outcome in run_all(&cfg, &ReportOptions::default())? {
        println!("{:<10} {}", outcome.report, outcome.error.as_deref().unwrap_or("ok"));
    }
    let net = cmd_export_network(&cfg, &["Author 0001".to_string()])?;
    println!("network of Author 0001: {} nodes, {} edges", net.nodes.len(), net.edges.len());

    let screened = cmd_screen(&cfg, &root.join("batch.jsonl"))?;
    println!("screened {} new submissions, {} flagged", screened.screened, screened.flagged);
    println!("outputs in {}", cfg.out_dir.display());
    Ok(())
}
