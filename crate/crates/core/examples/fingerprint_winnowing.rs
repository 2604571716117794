//! Fingerprints two texts that share a 12-word passage and shows that the
//! winnowed fingerprints intersect, plus the density of retained hashes.

use textreuse::corpus::tokenize;
use textreuse::fingerprint::{fingerprint_tokens, FingerprintConfig};
use textreuse::index::sorted_intersection;
use textreuse::synth::Synth;

fn main() {
    let cfg = FingerprintConfig::default();
    println!("k = {}, t = {}, window = {}", cfg.k, cfg.t, cfg.window());

    let mut s = Synth::new(1);
    let shared = s.text(cfg.t);
    let a = format!("{} {shared} {}", s.text(150), s.text(150));
    let b = format!("{} {shared} {}", s.text(80), s.text(200));

    let fa = fingerprint_tokens("a", &tokenize(&a), &cfg);
    let fb = fingerprint_tokens("b", &tokenize(&b), &cfg);
    let common: Vec<u64> = sorted_intersection(&fa.hash_set, &fb.hash_set).collect();
    let grams = tokenize(&a).len() - cfg.k + 1;
    println!(
        "doc a: {grams} grams, {} kept ({:.3}, expected about {:.3})",
        fa.entries.len(),
        fa.entries.len() as f64 / grams as f64,
        2.0 / (cfg.window() as f64 + 1.0)
    );
    println!("shared fingerprint hashes: {}", common.len());
    for e in fa.entries.iter().filter(|e| common.contains(&e.hash)) {
        println!("  hash {:016x} at gram {}", e.hash, e.pos);
    }

    let quoted = format!("{} \"{shared}\" {}", s.text(40), s.text(40));
    let fq = fingerprint_tokens("q", &tokenize(&quoted), &cfg);
    println!(
        "same passage inside quotation marks shares {} hashes",
        sorted_intersection(&fq.hash_set, &fa.hash_set).count()
    );
}
