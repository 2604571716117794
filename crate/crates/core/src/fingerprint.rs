//! Winnowed k-gram fingerprints.
//!
//! A document's token stream is cut into overlapping k-word grams, each gram
//! is hashed to 64 bits, and winnowing keeps the minimum hash of every window
//! of `w = t - k + 1` consecutive grams. Any run of at least `t` identical
//! words shared by two documents therefore produces at least one shared hash,
//! while only about `2 / (w + 1)` of all gram hashes are stored.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use xxhash_rust::xxh3::Xxh3;

use crate::corpus::{Document, TokenStream};

pub const DEFAULT_K: usize = 7;
pub const DEFAULT_T: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("gram length k must be at least 1")]
    ZeroK,
    #[error("guarantee window t={t} must exceed k={k} by at least one")]
    WindowTooSmall { k: usize, t: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FingerprintConfig {
    /// Gram length in words.
    pub k: usize,
    /// Guarantee threshold: shared runs of at least `t` words are always detected.
    pub t: usize,
    /// Skip grams lying entirely inside a quoted span.
    #[serde(default = "default_true")]
    pub exclude_quotes: bool,
}

fn default_true() -> bool {
    true
}

impl Default for FingerprintConfig {
    fn default() -> Self {
        FingerprintConfig { k: DEFAULT_K, t: DEFAULT_T, exclude_quotes: true }
    }
}

impl FingerprintConfig {
    pub fn new(k: usize, t: usize) -> Result<Self, ConfigError> {
        let cfg = FingerprintConfig { k, t, exclude_quotes: true };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 {
            return Err(ConfigError::ZeroK);
        }
        if self.t <= self.k {
            return Err(ConfigError::WindowTooSmall { k: self.k, t: self.t });
        }
        Ok(())
    }

    /// Hashes per winnowing window, `t - k + 1`.
    pub fn window(&self) -> usize {
        self.t - self.k + 1
    }
}

/// A k-gram and the token index it starts at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KGram<'a> {
    pub tokens: &'a [String],
    pub pos: usize,
}

/// All k-token windows of `ts`, minus those fully inside a quoted span.
pub fn extract_kgrams<'a>(ts: &'a TokenStream, cfg: &FingerprintConfig) -> Vec<KGram<'a>> {
    let k = cfg.k;
    if k == 0 || ts.len() < k {
        return Vec::new();
    }
    ts.tokens
        .windows(k)
        .enumerate()
        .filter(|(pos, _)| !(cfg.exclude_quotes && ts.is_quoted(&(*pos..*pos + k))))
        .map(|(pos, tokens)| KGram { tokens, pos })
        .collect()
}

/// Stable 64-bit hash of the gram's tokens joined by single spaces.
///
/// XXH3 over the byte string, so values are identical across platforms and runs.
pub fn hash_kgram<S: AsRef<str>>(gram: &[S]) -> u64 {
    let mut hasher = Xxh3::new();
    for (i, token) in gram.iter().enumerate() {
        if i > 0 {
            hasher.update(b" ");
        }
        hasher.update(token.as_ref().as_bytes());
    }
    hasher.digest()
}

/// A retained hash and the token index of its gram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Entry {
    pub hash: u64,
    pub pos: usize,
}

/// Keeps the minimum of every window of `w` consecutive hashes.
///
/// Ties go to the rightmost position and a hash picked by consecutive windows
/// is emitted once. Inputs shorter than `w` yield their single global minimum.
pub fn winnow(hashes: &[Entry], w: usize) -> Vec<Entry> {
    assert!(w >= 1, "window must hold at least one hash");
    if hashes.is_empty() {
        return Vec::new();
    }
    if hashes.len() < w {
        let min = hashes
            .iter()
            .rev()
            .min_by_key(|e| e.hash)
            .copied()
            .expect("nonempty");
        return vec![min];
    }

    let mut out: Vec<Entry> = Vec::with_capacity(2 * hashes.len() / (w + 1) + 1);
    // Indices with strictly increasing hash values; the front is the window's
    // rightmost minimum.
    let mut deque: VecDeque<usize> = VecDeque::with_capacity(w);
    let mut last_selected = usize::MAX;
    for (i, e) in hashes.iter().enumerate() {
        while deque.back().is_some_and(|&j| hashes[j].hash >= e.hash) {
            deque.pop_back();
        }
        deque.push_back(i);
        if i + 1 < w {
            continue;
        }
        let window_start = i + 1 - w;
        while deque.front().is_some_and(|&j| j < window_start) {
            deque.pop_front();
        }
        let selected = *deque.front().expect("window is nonempty");
        if selected != last_selected {
            out.push(hashes[selected]);
            last_selected = selected;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub doc_id: String,
    /// Retained hashes in increasing position order.
    pub entries: Vec<Entry>,
    /// Distinct hash values, sorted.
    pub hash_set: Vec<u64>,
}

impl Fingerprint {
    pub fn new(doc_id: impl Into<String>, entries: Vec<Entry>) -> Self {
        let mut hash_set: Vec<u64> = entries.iter().map(|e| e.hash).collect();
        hash_set.sort_unstable();
        hash_set.dedup();
        Fingerprint { doc_id: doc_id.into(), entries, hash_set }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Hashes every eligible gram of a token stream, in position order.
pub fn gram_hashes(ts: &TokenStream, cfg: &FingerprintConfig) -> Vec<Entry> {
    extract_kgrams(ts, cfg)
        .into_iter()
        .map(|g| Entry { hash: hash_kgram(g.tokens), pos: g.pos })
        .collect()
}

pub fn fingerprint_tokens(doc_id: &str, ts: &TokenStream, cfg: &FingerprintConfig) -> Fingerprint {
    Fingerprint::new(doc_id, winnow(&gram_hashes(ts, cfg), cfg.window()))
}

pub fn fingerprint_document(doc: &Document, cfg: &FingerprintConfig) -> Fingerprint {
    fingerprint_tokens(&doc.id, &doc.tokens, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use proptest::prelude::*;

    /// Brute-force winnowing: scan every window independently.
    fn winnow_oracle(hashes: &[Entry], w: usize) -> Vec<Entry> {
        if hashes.is_empty() {
            return vec![];
        }
        let windows = if hashes.len() < w { 1 } else { hashes.len() - w + 1 };
        let span = w.min(hashes.len());
        let mut picked: Vec<usize> = Vec::new();
        for start in 0..windows {
            let mut best = start;
            for j in start..start + span {
                if hashes[j].hash <= hashes[best].hash {
                    best = j;
                }
            }
            if picked.last() != Some(&best) {
                picked.push(best);
            }
        }
        picked.into_iter().map(|i| hashes[i]).collect()
    }

    fn entries(values: &[u64]) -> Vec<Entry> {
        values.iter().enumerate().map(|(pos, &hash)| Entry { hash, pos }).collect()
    }

    fn words(n: usize) -> TokenStream {
        tokenize(&(0..n).map(|i| format!("word{i}")).collect::<Vec<_>>().join(" "))
    }

    #[test]
    fn config_validation() {
        assert_eq!(FingerprintConfig::default().window(), 6);
        assert!(FingerprintConfig::new(7, 7).is_err());
        assert!(FingerprintConfig::new(0, 5).is_err());
        assert!(FingerprintConfig::new(3, 4).is_ok());
    }

    #[test]
    fn kgram_counts() {
        let cfg = FingerprintConfig::default();
        assert_eq!(extract_kgrams(&words(10), &cfg).len(), 4);
        let ts7 = words(7);
        let seven = extract_kgrams(&ts7, &cfg);
        assert_eq!(seven.len(), 1);
        assert_eq!(seven[0].pos, 0);
        assert!(extract_kgrams(&words(6), &cfg).is_empty());
    }

    #[test]
    fn quoted_grams_are_skipped() {
        let text = r#"a b "c d e f g h i j" k l"#;
        let ts = tokenize(text);
        let cfg = FingerprintConfig::default();
        // quoted span is tokens 2..10 (8 tokens): grams at pos 2 and 3 lie inside.
        let positions: Vec<usize> = extract_kgrams(&ts, &cfg).iter().map(|g| g.pos).collect();
        assert_eq!(positions, vec![0, 1, 4, 5]);
        let keep = FingerprintConfig { exclude_quotes: false, ..cfg };
        assert_eq!(extract_kgrams(&ts, &keep).len(), 6);
    }

    #[test]
    fn hash_is_deterministic_and_space_joined() {
        let a = ["the", "quick", "brown", "fox", "jumps", "over", "it"];
        assert_eq!(hash_kgram(&a), hash_kgram(&a));
        assert_eq!(hash_kgram(&a), xxhash_rust::xxh3::xxh3_64(a.join(" ").as_bytes()));
        let b = ["the", "quick", "brown", "fox", "jumps", "under", "it"];
        assert_ne!(hash_kgram(&a), hash_kgram(&b));
        // Pinned value guards cross-version stability of persisted indexes.
        assert_eq!(hash_kgram(&["a"]), xxhash_rust::xxh3::xxh3_64(b"a"));
    }

    #[test]
    fn single_window_minimum() {
        let out = winnow(&entries(&[5, 3, 8, 9, 2, 7]), 6);
        assert_eq!(out, vec![Entry { hash: 2, pos: 4 }]);
    }

    #[test]
    fn short_input_keeps_rightmost_global_minimum() {
        let out = winnow(&entries(&[4, 1, 9, 1]), 6);
        assert_eq!(out, vec![Entry { hash: 1, pos: 3 }]);
        assert!(winnow(&[], 6).is_empty());
    }

    #[test]
    fn ties_prefer_rightmost() {
        let out = winnow(&entries(&[1, 1, 1, 1, 1, 1, 1, 1]), 3);
        assert_eq!(out, winnow_oracle(&entries(&[1, 1, 1, 1, 1, 1, 1, 1]), 3));
        assert_eq!(out.iter().map(|e| e.pos).collect::<Vec<_>>(), vec![2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn empty_document_fingerprint() {
        let fp = fingerprint_tokens("x", &TokenStream::default(), &FingerprintConfig::default());
        assert!(fp.is_empty());
        assert!(fp.hash_set.is_empty());
    }

    proptest! {
        #[test]
        fn winnow_matches_oracle(values in prop::collection::vec(0u64..20, 0..80), w in 1usize..8) {
            let input = entries(&values);
            prop_assert_eq!(winnow(&input, w), winnow_oracle(&input, w));
        }

        #[test]
        fn winnow_output_is_subsequence(values in prop::collection::vec(any::<u64>(), 0..200)) {
            let input = entries(&values);
            let out = winnow(&input, 6);
            let mut it = input.iter();
            for e in &out {
                prop_assert!(it.any(|x| x == e));
            }
            prop_assert!(out.windows(2).all(|p| p[0].pos < p[1].pos));
        }

        #[test]
        fn fingerprint_invariants(n in 0usize..60, quote in prop::option::of((0usize..60, 0usize..20))) {
            let mut toks: Vec<String> = (0..n).map(|i| format!("t{}", i % 13)).collect();
            if let Some((at, len)) = quote {
                if at < toks.len() {
                    let end = (at + len).min(toks.len().saturating_sub(1));
                    toks[at] = format!("\"{}", toks[at]);
                    toks[end] = format!("{}\"", toks[end]);
                }
            }
            let ts = tokenize(&toks.join(" "));
            let cfg = FingerprintConfig::default();
            let fp = fingerprint_tokens("d", &ts, &cfg);
            prop_assert!(fp.entries.len() <= ts.len().saturating_sub(cfg.k - 1));
            prop_assert!(fp.entries.windows(2).all(|p| p[0].pos < p[1].pos));
            for e in &fp.entries {
                prop_assert!(e.pos + cfg.k <= ts.len());
                prop_assert!(!ts.is_quoted(&(e.pos..e.pos + cfg.k)));
                prop_assert_eq!(e.hash, hash_kgram(&ts.tokens[e.pos..e.pos + cfg.k]));
            }
        }
    }
}
