//! Corpus ingestion: JSONL records become normalized, tokenized [`Document`]s.
//!
//! Text goes through two preprocessing passes before tokenization. The
//! trailing reference section is cut off ([`strip_references`]) and spans
//! enclosed in double quotes are recorded in the token stream's quote mask so
//! that fingerprinting can skip k-grams lying entirely inside a quotation.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::ops::Range;
use std::sync::OnceLock;

use chrono::NaiveDate;
use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::country::{country_from_email, UNKNOWN};

/// Default author count above which a document counts as a large collaboration.
pub const DEFAULT_COLLABORATION_THRESHOLD: usize = 50;

/// Keywords marking self-identified review-type material.
pub const REVIEW_KEYWORDS: &[&str] = &[
    "review",
    "proceedings",
    "thesis",
    "dissertation",
    "lecture",
    "lectures",
    "book",
    "survey",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
}

/// Lowercase word tokens plus the token ranges that sit inside quotation marks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub tokens: Vec<String>,
    /// Half-open token index ranges, sorted and disjoint.
    pub quote_mask: Vec<Range<usize>>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// True when `span` lies entirely within a single quoted range.
    pub fn is_quoted(&self, span: &Range<usize>) -> bool {
        // Ranges are sorted; find the last one starting at or before span.start.
        let i = self.quote_mask.partition_point(|r| r.start <= span.start);
        i > 0 && self.quote_mask[i - 1].end >= span.end
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Quote {
    Straight,
    Typographic,
}

/// Splits text into maximal runs of alphanumeric characters, lowercased.
///
/// Every other character is a separator. Matched double quotes (`"` pairs or
/// `“` ... `”`) mark the tokens between them in the quote mask; an unmatched
/// opening quote is ignored.
pub fn tokenize(raw: &str) -> TokenStream {
    let mut tokens = Vec::new();
    let mut quote_mask = Vec::new();
    let mut current = String::new();
    let mut open: Option<(usize, Quote)> = None;

    let flush = |current: &mut String, tokens: &mut Vec<String>| {
        if !current.is_empty() {
            tokens.push(std::mem::take(current));
        }
    };

    for ch in raw.chars() {
        if ch.is_alphanumeric() {
            // Lowercasing may expand into combining marks (e.g. U+0130); keep
            // only alphanumerics so the output re-tokenizes to itself.
            current.extend(ch.to_lowercase().filter(|c| c.is_alphanumeric()));
            continue;
        }
        flush(&mut current, &mut tokens);
        let close = |start: usize, tokens: &Vec<String>, mask: &mut Vec<Range<usize>>| {
            if tokens.len() > start {
                mask.push(start..tokens.len());
            }
        };
        match (ch, open) {
            ('"', Some((start, _))) | ('\u{201D}', Some((start, _))) => {
                close(start, &tokens, &mut quote_mask);
                open = None;
            }
            ('"', None) => open = Some((tokens.len(), Quote::Straight)),
            ('\u{201C}', None) => open = Some((tokens.len(), Quote::Typographic)),
            ('\u{201C}', Some((_, Quote::Straight))) => {
                open = Some((tokens.len(), Quote::Typographic))
            }
            _ => {}
        }
    }
    flush(&mut current, &mut tokens);
    TokenStream { tokens, quote_mask }
}

fn reference_heading() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?im)^[ \t]*(?:(?:[0-9]+|[ivxlc]+)\.?[ \t]+)?(?:references|bibliography|literature[ \t]+cited)[ \t]*:?[ \t]*\r?$",
        )
        .expect("valid regex")
    })
}

/// Truncates `raw` at the last references heading in the final 40% of the text.
///
/// A heading is a line holding only "References", "Bibliography" or
/// "Literature cited" (any case, optionally numbered, optional colon).
/// Text without such a heading is returned unchanged.
pub fn strip_references(raw: &str) -> &str {
    let cutoff = raw.len() * 3 / 5;
    reference_heading()
        .find_iter(raw)
        .filter(|m| m.start() >= cutoff)
        .last()
        .map_or(raw, |m| &raw[..m.start()])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DocKind {
    Normal,
    ReviewType,
    LargeCollaboration,
}

/// Metadata consulted by [`classify_kind`].
#[derive(Debug, Clone, Copy, Default)]
pub struct KindMetadata<'a> {
    pub title: Option<&'a str>,
    pub comments: &'a str,
    pub author_count: usize,
    /// Set when the record names a collaboration instead of listing authors.
    pub collaboration: bool,
}

fn review_keyword() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let pattern = format!(r"(?i)\b(?:{})\b", REVIEW_KEYWORDS.join("|"));
        Regex::new(&pattern).expect("valid regex")
    })
}

pub fn classify_kind(meta: &KindMetadata<'_>, collaboration_threshold: usize) -> DocKind {
    if meta.author_count > collaboration_threshold || (meta.collaboration && meta.author_count == 0) {
        return DocKind::LargeCollaboration;
    }
    let re = review_keyword();
    if re.is_match(meta.comments) || meta.title.is_some_and(|t| re.is_match(t)) {
        DocKind::ReviewType
    } else {
        DocKind::Normal
    }
}

/// Normalized author key: diacritics folded, lowercase, single-spaced.
pub fn normalize_author(name: &str) -> String {
    let folded: String = name.nfd().filter(|c| !is_combining_mark(*c)).collect();
    folded
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    /// Normalized author keys in listed order, duplicates removed.
    pub authors: Vec<String>,
    pub submit_date: NaiveDate,
    /// Date of the latest replacement version, when the record carries one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revised_date: Option<NaiveDate>,
    #[serde(default)]
    pub comments: String,
    pub submitter_country: String,
    #[serde(default)]
    pub cited_ids: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collaboration: Option<String>,
    pub kind: DocKind,
    pub tokens: TokenStream,
}

impl Document {
    /// Chronological sort key; same-day ties fall back to the id.
    pub fn chrono_key(&self) -> (NaiveDate, &str) {
        (self.submit_date, self.id.as_str())
    }

    pub fn shares_author(&self, other: &Document) -> bool {
        self.authors.iter().any(|a| other.authors.contains(a))
    }

    pub fn cites(&self, other: &Document) -> bool {
        self.cited_ids.contains(&other.id)
    }
}

/// One line of the JSONL corpus. Unknown fields are ignored.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: Option<String>,
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub authors: Option<Vec<String>>,
    pub date: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comments: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub submitter_email: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citations: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collaboration: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub updated: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    pub collaboration_threshold: usize,
    pub strip_references: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            collaboration_threshold: DEFAULT_COLLABORATION_THRESHOLD,
            strip_references: true,
        }
    }
}

fn parse_date(field: &str, value: &str) -> Result<NaiveDate, CorpusError> {
    // Accept full timestamps by reading only the date part.
    let day = value.get(..10).unwrap_or(value);
    NaiveDate::parse_from_str(day, "%Y-%m-%d")
        .map_err(|e| CorpusError::MalformedRecord(format!("bad {field} `{value}`: {e}")))
}

/// Parses one JSONL line into a [`Document`].
pub fn parse_corpus_record(line: &str, opts: &IngestOptions) -> Result<Document, CorpusError> {
    let record: CorpusRecord = serde_json::from_str(line)
        .map_err(|e| CorpusError::MalformedRecord(format!("invalid JSON: {e}")))?;
    document_from_record(record, opts)
}

pub fn document_from_record(
    record: CorpusRecord,
    opts: &IngestOptions,
) -> Result<Document, CorpusError> {
    let missing = |f: &str| CorpusError::MalformedRecord(format!("missing `{f}`"));
    let id = record.id.filter(|s| !s.trim().is_empty()).ok_or_else(|| missing("id"))?;
    let text = record.text.ok_or_else(|| missing("text"))?;
    let date = record.date.ok_or_else(|| missing("date"))?;
    let submit_date = parse_date("date", &date)?;
    let revised_date = record.updated.as_deref().map(|d| parse_date("updated", d)).transpose()?;

    let mut authors: Vec<String> = Vec::new();
    for name in record.authors.unwrap_or_default() {
        let key = normalize_author(&name);
        if !key.is_empty() && !authors.contains(&key) {
            authors.push(key);
        }
    }
    let collaboration = record.collaboration.filter(|c| !c.trim().is_empty());
    if authors.is_empty() && collaboration.is_none() {
        return Err(missing("authors"));
    }

    let comments = record.comments.unwrap_or_default();
    let kind = classify_kind(
        &KindMetadata {
            title: record.title.as_deref(),
            comments: &comments,
            author_count: authors.len(),
            collaboration: collaboration.is_some(),
        },
        opts.collaboration_threshold,
    );
    let submitter_country = record
        .submitter_email
        .as_deref()
        .map(country_from_email)
        .unwrap_or_else(|| UNKNOWN.to_string());
    let cited_ids = record
        .citations
        .unwrap_or_default()
        .into_iter()
        .filter(|c| *c != id && !c.is_empty())
        .collect();

    let body = if opts.strip_references { strip_references(&text) } else { &text };
    let tokens = tokenize(body);

    Ok(Document {
        id,
        title: record.title,
        authors,
        submit_date,
        revised_date,
        comments,
        submitter_country,
        cited_ids,
        collaboration,
        kind,
        tokens,
    })
}

/// In-memory document store keyed by id.
#[derive(Debug, Clone, Default)]
pub struct DocumentStore {
    docs: BTreeMap<String, Document>,
    by_author: BTreeMap<String, BTreeSet<String>>,
}

impl DocumentStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn insert(&mut self, doc: Document) -> Result<(), CorpusError> {
        if self.docs.contains_key(&doc.id) {
            return Err(CorpusError::DuplicateId(doc.id));
        }
        self.put(doc);
        Ok(())
    }

    /// Inserts or replaces, returning the previous version if any.
    pub fn replace(&mut self, doc: Document) -> Option<Document> {
        let old = self.docs.remove(&doc.id);
        if let Some(old) = &old {
            for a in &old.authors {
                if let Some(set) = self.by_author.get_mut(a) {
                    set.remove(&old.id);
                    if set.is_empty() {
                        self.by_author.remove(a);
                    }
                }
            }
        }
        self.put(doc);
        old
    }

    fn put(&mut self, doc: Document) {
        for a in &doc.authors {
            self.by_author.entry(a.clone()).or_default().insert(doc.id.clone());
        }
        self.docs.insert(doc.id.clone(), doc);
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.docs.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.docs.contains_key(id)
    }

    /// Documents in id order.
    pub fn iter(&self) -> impl Iterator<Item = &Document> {
        self.docs.values()
    }

    /// Documents in chronological order.
    pub fn chronological(&self) -> Vec<&Document> {
        let mut docs: Vec<&Document> = self.docs.values().collect();
        docs.sort_by(|a, b| a.chrono_key().cmp(&b.chrono_key()));
        docs
    }

    /// Ids of documents listing `author` (a normalized key).
    pub fn docs_by_author(&self, author: &str) -> impl Iterator<Item = &Document> {
        self.by_author
            .get(author)
            .into_iter()
            .flatten()
            .filter_map(|id| self.docs.get(id))
    }

    pub fn authors(&self) -> impl Iterator<Item = &str> {
        self.by_author.keys().map(String::as_str)
    }

    /// Citation counts per document, ignoring citing documents that share an author.
    pub fn citation_counts(&self) -> BTreeMap<String, usize> {
        let mut counts: BTreeMap<String, usize> =
            self.docs.keys().map(|id| (id.clone(), 0)).collect();
        for citing in self.docs.values() {
            for cited in &citing.cited_ids {
                if let Some(target) = self.docs.get(cited) {
                    if !citing.shares_author(target) {
                        *counts.get_mut(cited).expect("present") += 1;
                    }
                }
            }
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineError {
    /// One-based line number in the input.
    pub line: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub error: String,
}

/// Summary of one ingestion run, written out as the manifest.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub ingested: usize,
    pub by_kind: BTreeMap<String, usize>,
    pub errors: Vec<LineError>,
}

/// Reads a JSONL corpus, parsing records in parallel and inserting in line order.
///
/// Bad lines and repeated ids are recorded in the report; the first
/// occurrence of an id wins.
pub fn ingest_jsonl<R: BufRead>(
    reader: R,
    opts: &IngestOptions,
    store: &mut DocumentStore,
) -> std::io::Result<IngestReport> {
    let lines: Vec<(usize, String)> = reader
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)))
        .collect::<Result<_, _>>()?;
    let parsed: Vec<(usize, Result<Document, CorpusError>)> = lines
        .par_iter()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| (*n, parse_corpus_record(l, opts)))
        .collect();

    let mut report = IngestReport::default();
    for (line, result) in parsed {
        let outcome = result.and_then(|doc| {
            let kind = doc.kind;
            store.insert(doc).map(|_| kind)
        });
        match outcome {
            Ok(kind) => {
                report.ingested += 1;
                *report.by_kind.entry(format!("{kind:?}")).or_default() += 1;
            }
            Err(e) => report.errors.push(LineError {
                line,
                id: match &e {
                    CorpusError::DuplicateId(id) => Some(id.clone()),
                    CorpusError::MalformedRecord(_) => None,
                },
                error: e.to_string(),
            }),
        }
    }
    Ok(report)
}
