//! Seeded synthetic corpora for tests, examples and benchmarks.
//!
//! Every generator is a pure function of its seed. Texts are drawn from a
//! random vocabulary large enough that unplanted 7-gram collisions do not
//! occur in practice, so every overlap in a generated corpus is one that was
//! planted on purpose.

use std::collections::BTreeSet;

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{document_from_record, tokenize, CorpusRecord, DocumentStore, IngestOptions};
use crate::fingerprint::{fingerprint_tokens, FingerprintConfig};
use crate::index::sorted_intersection;

pub const VOCAB_SIZE: usize = 20_000;

/// Random word source.
pub struct Synth {
    rng: ChaCha8Rng,
    vocab: Vec<String>,
}

impl Synth {
    pub fn new(seed: u64) -> Synth {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = BTreeSet::new();
        let mut vocab = Vec::with_capacity(VOCAB_SIZE);
        while vocab.len() < VOCAB_SIZE {
            let len = rng.gen_range(3..=9);
            let w: String = (0..len).map(|_| rng.gen_range(b'a'..=b'z') as char).collect();
            if seen.insert(w.clone()) {
                vocab.push(w);
            }
        }
        Synth { rng, vocab }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn words(&mut self, n: usize) -> Vec<String> {
        (0..n).map(|_| self.vocab[self.rng.gen_range(0..self.vocab.len())].clone()).collect()
    }

    pub fn text(&mut self, n: usize) -> String {
        self.words(n).join(" ")
    }
}

/// Email on a domain whose suffix maps to `country`.
pub fn email_for(user: &str, country: &str) -> String {
    let tld = match country {
        "US" => "edu".to_string(),
        "GB" => "uk".to_string(),
        c => c.to_ascii_lowercase(),
    };
    format!("{}@inst.{tld}", user.replace(' ', "."))
}

pub fn record(
    id: &str,
    authors: &[String],
    date: NaiveDate,
    text: String,
    citations: Vec<String>,
    country: &str,
) -> CorpusRecord {
    CorpusRecord {
        id: Some(id.to_string()),
        text: Some(text),
        title: Some(format!("On {id}")),
        authors: Some(authors.to_vec()),
        date: Some(date.format("%Y-%m-%d").to_string()),
        submitter_email: authors.first().map(|a| email_for(a, country)),
        citations: (!citations.is_empty()).then_some(citations),
        ..Default::default()
    }
}

pub fn to_jsonl(records: &[CorpusRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect()
}

/// Builds a store directly, skipping JSON. Panics on invalid records.
pub fn store_from(records: &[CorpusRecord], opts: &IngestOptions) -> DocumentStore {
    let mut store = DocumentStore::default();
    for r in records {
        store.insert(document_from_record(r.clone(), opts).expect("valid synthetic record")).expect("unique id");
    }
    store
}

fn day(start: NaiveDate, n: u64) -> NaiveDate {
    start.checked_add_days(Days::new(n)).expect("date in range")
}

fn start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date")
}

/// Parameters of [`random_corpus`].
#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub seed: u64,
    pub n_docs: usize,
    pub n_authors: usize,
    pub max_authors_per_doc: usize,
    pub doc_tokens: usize,
    /// Chance that a normal document copies a run from an earlier one.
    pub copy_rate: f64,
    /// Same, for review-type documents.
    pub review_copy_rate: f64,
    pub copy_len: (usize, usize),
    pub review_rate: f64,
    /// Chance that a copying document cites its source.
    pub cite_rate: f64,
    pub docs_per_day: usize,
    pub countries: Vec<String>,
    /// Chance that a document carries a fixed 40-token stock phrase.
    pub boilerplate_rate: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            seed: 7,
            n_docs: 200,
            n_authors: 120,
            max_authors_per_doc: 3,
            doc_tokens: 400,
            copy_rate: 0.2,
            review_copy_rate: 0.2,
            copy_len: (12, 300),
            review_rate: 0.1,
            cite_rate: 0.3,
            docs_per_day: 5,
            countries: ["US", "DE", "FR", "GB", "JP"].map(String::from).to_vec(),
            boilerplate_rate: 0.0,
        }
    }
}

/// Random documents with planted copies of earlier text.
///
/// Ids are `d00000`, `d00001`, ... in submission order. Each copy takes a
/// run of `copy_len` tokens from a uniformly chosen earlier document and
/// splices it into the new text.
pub fn random_corpus(spec: &CorpusSpec) -> Vec<CorpusRecord> {
    let mut s = Synth::new(spec.seed);
    let boilerplate = s.words(40);
    let authors: Vec<String> = (0..spec.n_authors).map(|i| format!("Author {i:04}")).collect();
    let mut texts: Vec<Vec<String>> = Vec::with_capacity(spec.n_docs);
    let mut out = Vec::with_capacity(spec.n_docs);
    for i in 0..spec.n_docs {
        let id = format!("d{i:05}");
        let n_auth = s.rng().gen_range(1..=spec.max_authors_per_doc.max(1));
        let mut names: Vec<String> = authors.choose_multiple(s.rng(), n_auth).cloned().collect();
        names.sort();
        let review = s.rng().gen_bool(spec.review_rate);
        let mut words = s.words(spec.doc_tokens);
        let mut citations = Vec::new();
        let rate = if review { spec.review_copy_rate } else { spec.copy_rate };
        if i > 0 && s.rng().gen_bool(rate) {
            let src = s.rng().gen_range(0..i);
            let src_words = &texts[src];
            let len = s.rng().gen_range(spec.copy_len.0..=spec.copy_len.1).min(src_words.len());
            let from = s.rng().gen_range(0..=src_words.len() - len);
            let at = s.rng().gen_range(0..=words.len());
            let run: Vec<String> = src_words[from..from + len].to_vec();
            words.splice(at..at, run);
            if s.rng().gen_bool(spec.cite_rate) {
                citations.push(format!("d{src:05}"));
            }
        }
        if spec.boilerplate_rate > 0.0 && s.rng().gen_bool(spec.boilerplate_rate) {
            let at = s.rng().gen_range(0..=words.len());
            words.splice(at..at, boilerplate.iter().cloned());
        }
        let country = spec.countries[s.rng().gen_range(0..spec.countries.len())].clone();
        let date = day(start_date(), (i / spec.docs_per_day.max(1)) as u64);
        let mut r = record(&id, &names, date, words.join(" "), citations, &country);
        if review {
            r.comments = Some("invited review article".into());
        }
        out.push(r);
        texts.push(words);
    }
    out
}

/// Corpus in which an article's external citations fall as its copied share
/// rises.
///
/// For each `i < n` there is a source `s{i}` and a copier `c{i}` that takes
/// the fraction `f_i` of its text from `s{i}`, with `f_i` spread over
/// `[0.08, 0.93]`. Citers `z{j}` submitted last cite each copier about
/// `100 (1 - f)` times and each source about `80 (1 - f)` times, with a
/// little noise. Every document has distinct authors, so no citation is a
/// self-citation.
pub fn citation_corpus(seed: u64, n: usize) -> Vec<CorpusRecord> {
    const LEN: usize = 400;
    const CITERS: usize = 110;
    let mut s = Synth::new(seed);
    let countries = ["US", "DE", "FR", "GB", "JP"];
    let mut out = Vec::new();
    let mut targets: Vec<(String, usize)> = Vec::new();
    for i in 0..n {
        let f = 0.08 + 0.85 * i as f64 / n.max(1) as f64;
        let country = countries[i % countries.len()];
        let source_words = s.words(LEN);
        let copied = (f * LEN as f64).round() as usize;
        let mut copier_words = source_words[..copied].to_vec();
        copier_words.extend(s.words(LEN - copied));
        let noise = |s: &mut Synth| s.rng().gen_range(-4i64..=4);
        let c_target = (100.0 * (1.0 - f)).round() as i64 + noise(&mut s);
        let s_target = (80.0 * (1.0 - f)).round() as i64 + noise(&mut s);
        let sid = format!("s{i:04}");
        let cid = format!("c{i:04}");
        out.push(record(&sid, &[format!("Source {i}")], day(start_date(), i as u64), source_words.join(" "), vec![], country));
        out.push(record(
            &cid,
            &[format!("Copier {i}")],
            day(start_date(), (n + i) as u64),
            copier_words.join(" "),
            vec![],
            country,
        ));
        targets.push((cid, c_target.clamp(0, CITERS as i64) as usize));
        targets.push((sid, s_target.clamp(0, CITERS as i64) as usize));
    }
    for j in 0..CITERS {
        let cites: Vec<String> = targets.iter().filter(|(_, t)| j < *t).map(|(id, _)| id.clone()).collect();
        out.push(record(
            &format!("z{j:04}"),
            &[format!("Citer {j}")],
            day(start_date(), (2 * n + j) as u64),
            s.text(120),
            cites,
            countries[j % countries.len()],
        ));
    }
    out
}

/// Documents by one focal author with planted self-reuse.
///
/// Every document has `author` plus one rotating coauthor. Document `i` in
/// `reusing` copies `copy_len` tokens from each of its `links` predecessors.
pub fn focal_author_corpus(
    seed: u64,
    author: &str,
    n_docs: usize,
    reusing: &BTreeSet<usize>,
    links: usize,
    copy_len: usize,
) -> Vec<CorpusRecord> {
    let mut s = Synth::new(seed);
    let slug: String = author.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
    let mut texts: Vec<Vec<String>> = Vec::new();
    let mut out = Vec::new();
    for i in 0..n_docs {
        let mut words = s.words(700);
        if reusing.contains(&i) {
            for back in 1..=links.min(i) {
                let src = &texts[i - back];
                let from = s.rng().gen_range(0..=src.len() - copy_len);
                let run = src[from..from + copy_len].to_vec();
                let at = s.rng().gen_range(0..=words.len());
                words.splice(at..at, run);
            }
        }
        let names = vec![author.to_string(), format!("{author} coauthor {}", i % 5)];
        out.push(record(&format!("{slug}{i:03}"), &names, day(start_date(), i as u64), words.join(" "), vec![], "US"));
        texts.push(words);
    }
    out
}

/// Text made of `filler` followed by a prefix of `base` chosen so that its
/// fingerprint shares exactly `target` hashes with the fingerprint of `base`.
///
/// Returns `None` when no prefix hits the count exactly, which happens only
/// if `base` is too short.
pub fn text_sharing(base: &[String], filler: &[String], target: usize, cfg: &FingerprintConfig) -> Option<String> {
    let base_fp = fingerprint_tokens("base", &tokenize(&base.join(" ")), cfg);
    for start in 0..base.len().min(64) {
        let mut lo = start + cfg.k;
        let mut hi = base.len();
        let shared_at = |end: usize| {
            let mut words = filler.to_vec();
            words.extend_from_slice(&base[start..end]);
            let text = words.join(" ");
            let fp = fingerprint_tokens("probe", &tokenize(&text), cfg);
            (sorted_intersection(&fp.hash_set, &base_fp.hash_set).count(), text)
        };
        if shared_at(hi).0 < target {
            return None;
        }
        // Shared count is non-decreasing in the prefix length; find the
        // shortest prefix reaching the target.
        while lo < hi {
            let mid = (lo + hi) / 2;
            if shared_at(mid).0 >= target {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let (n, text) = shared_at(lo);
        if n == target {
            return Some(text);
        }
    }
    None
}
