//! Hash → postings index over document fingerprints.
//!
//! Documents are interned to dense slots; each postings list holds the slots
//! of every document whose fingerprint contains the hash. "Common" hashes,
//! those spread over at least four coauthor-disconnected groups of documents,
//! are kept in the postings and filtered at query time through a
//! [`CommonHashSet`].

mod persist;

use std::collections::{HashMap, HashSet};

use chrono::NaiveDate;
use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::Document;
use crate::fingerprint::{Fingerprint, FingerprintConfig};
use crate::unionfind::UnionFind;

pub use persist::{FORMAT_VERSION, MAGIC};

/// Default number of disconnected coauthor components that makes a hash common.
pub const DEFAULT_COMPONENT_THRESHOLD: usize = 4;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("document `{0}` is already indexed")]
    DuplicateId(String),
    #[error("unknown document `{0}`")]
    UnknownDoc(String),
    #[error("fingerprint belongs to `{fingerprint}` but document is `{document}`")]
    FingerprintMismatch { fingerprint: String, document: String },
    #[error("index format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u8, expected: u8 },
    #[error("corrupt index file: {0}")]
    CorruptFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertMode {
    /// Fail with [`IndexError::DuplicateId`] if the id is present.
    Insert,
    /// Drop the previous version's postings first.
    Replace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct DocEntry {
    pub(crate) id: String,
    pub(crate) authors: Vec<u32>,
    pub(crate) submit_date: NaiveDate,
    /// Distinct fingerprint hashes, sorted.
    pub(crate) hashes: Vec<u64>,
}

/// Read-only view of one indexed document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocInfo<'a> {
    pub id: &'a str,
    pub authors: Vec<&'a str>,
    pub submit_date: NaiveDate,
    pub fingerprint_size: usize,
}

/// Hashes treated as boilerplate.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommonHashSet {
    pub hashes: HashSet<u64>,
    pub component_threshold: usize,
}

impl CommonHashSet {
    /// A set with no members, for queries that should count every hash.
    pub fn empty(component_threshold: usize) -> Self {
        CommonHashSet { hashes: HashSet::new(), component_threshold }
    }

    pub fn contains(&self, hash: u64) -> bool {
        self.hashes.contains(&hash)
    }

    pub fn len(&self) -> usize {
        self.hashes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hashes.is_empty()
    }

    /// Members in ascending order.
    pub fn sorted(&self) -> Vec<u64> {
        let mut v: Vec<u64> = self.hashes.iter().copied().collect();
        v.sort_unstable();
        v
    }
}

#[derive(Debug, Clone)]
pub struct PostingsIndex {
    config: FingerprintConfig,
    pub(crate) docs: Vec<DocEntry>,
    slots: HashMap<String, u32>,
    postings: HashMap<u64, Vec<u32>>,
    pub(crate) author_keys: Vec<String>,
    author_ids: HashMap<String, u32>,
}

impl PostingsIndex {
    pub fn new(config: FingerprintConfig) -> Self {
        PostingsIndex {
            config,
            docs: Vec::new(),
            slots: HashMap::new(),
            postings: HashMap::new(),
            author_keys: Vec::new(),
            author_ids: HashMap::new(),
        }
    }

    pub fn config(&self) -> &FingerprintConfig {
        &self.config
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    /// Number of distinct hashes with a nonempty postings list.
    pub fn num_hashes(&self) -> usize {
        self.postings.len()
    }

    pub fn total_postings(&self) -> usize {
        self.postings.values().map(Vec::len).sum()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.slots.contains_key(id)
    }

    fn slot(&self, id: &str) -> Result<u32, IndexError> {
        self.slots.get(id).copied().ok_or_else(|| IndexError::UnknownDoc(id.to_string()))
    }

    fn intern_author(&mut self, key: &str) -> u32 {
        if let Some(&a) = self.author_ids.get(key) {
            return a;
        }
        let a = self.author_keys.len() as u32;
        self.author_keys.push(key.to_string());
        self.author_ids.insert(key.to_string(), a);
        a
    }

    /// Adds a document's fingerprint. Cost is linear in the fingerprint size.
    pub fn add_document(
        &mut self,
        fp: &Fingerprint,
        doc: &Document,
        mode: InsertMode,
    ) -> Result<(), IndexError> {
        if fp.doc_id != doc.id {
            return Err(IndexError::FingerprintMismatch {
                fingerprint: fp.doc_id.clone(),
                document: doc.id.clone(),
            });
        }
        self.add_entry(&doc.id, &doc.authors, doc.submit_date, fp.hash_set.clone(), mode)
    }

    pub(crate) fn add_entry(
        &mut self,
        id: &str,
        authors: &[String],
        submit_date: NaiveDate,
        hashes: Vec<u64>,
        mode: InsertMode,
    ) -> Result<(), IndexError> {
        let mut author_ids: Vec<u32> = authors.iter().map(|a| self.intern_author(a)).collect();
        author_ids.sort_unstable();
        author_ids.dedup();
        let entry = DocEntry { id: id.to_string(), authors: author_ids, submit_date, hashes };

        match (self.slots.get(id).copied(), mode) {
            (Some(_), InsertMode::Insert) => Err(IndexError::DuplicateId(id.to_string())),
            (Some(slot), InsertMode::Replace) => {
                let old = std::mem::replace(&mut self.docs[slot as usize], entry);
                for h in &old.hashes {
                    if let Some(list) = self.postings.get_mut(h) {
                        if let Ok(i) = list.binary_search(&slot) {
                            list.remove(i);
                        }
                        if list.is_empty() {
                            self.postings.remove(h);
                        }
                    }
                }
                for &h in &self.docs[slot as usize].hashes {
                    let list = self.postings.entry(h).or_default();
                    if let Err(i) = list.binary_search(&slot) {
                        list.insert(i, slot);
                    }
                }
                Ok(())
            }
            (None, _) => {
                let slot = self.docs.len() as u32;
                for &h in &entry.hashes {
                    // New slots are the largest, so pushing keeps lists sorted.
                    self.postings.entry(h).or_default().push(slot);
                }
                self.slots.insert(id.to_string(), slot);
                self.docs.push(entry);
                Ok(())
            }
        }
    }

    pub fn doc_info(&self, id: &str) -> Result<DocInfo<'_>, IndexError> {
        let d = &self.docs[self.slot(id)? as usize];
        Ok(DocInfo {
            id: &d.id,
            authors: d.authors.iter().map(|&a| self.author_keys[a as usize].as_str()).collect(),
            submit_date: d.submit_date,
            fingerprint_size: d.hashes.len(),
        })
    }

    /// Sorted distinct hashes of an indexed document.
    pub fn doc_hashes(&self, id: &str) -> Result<&[u64], IndexError> {
        Ok(&self.docs[self.slot(id)? as usize].hashes)
    }

    /// Ids of documents containing `hash`, sorted.
    pub fn postings(&self, hash: u64) -> Vec<&str> {
        let mut ids: Vec<&str> = self
            .postings
            .get(&hash)
            .into_iter()
            .flatten()
            .map(|&s| self.docs[s as usize].id.as_str())
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Ids of every indexed document, sorted.
    pub fn doc_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.docs.iter().map(|d| d.id.as_str()).collect();
        ids.sort_unstable();
        ids
    }

    /// Whether some document chronologically before `(date, id)` contains `hash`.
    pub fn seen_before(&self, hash: u64, date: NaiveDate, id: &str) -> bool {
        self.postings.get(&hash).is_some_and(|list| {
            list.iter().any(|&s| {
                let d = &self.docs[s as usize];
                (d.submit_date, d.id.as_str()) < (date, id)
            })
        })
    }

    /// Connected components among `doc_ids`, joining documents that share an author.
    pub fn coauthor_components(&self, doc_ids: &[&str]) -> Result<usize, IndexError> {
        let mut slots: Vec<u32> = doc_ids.iter().map(|id| self.slot(id)).collect::<Result<_, _>>()?;
        slots.sort_unstable();
        slots.dedup();
        Ok(self.components_of(&slots))
    }

    /// Component count of the coauthor graph on `slots`.
    fn components_of(&self, slots: &[u32]) -> usize {
        let mut uf = UnionFind::new(slots.len());
        let mut first_with_author: HashMap<u32, usize> = HashMap::new();
        for (i, &s) in slots.iter().enumerate() {
            for &a in &self.docs[s as usize].authors {
                match first_with_author.get(&a) {
                    Some(&j) => {
                        uf.union(i, j);
                    }
                    None => {
                        first_with_author.insert(a, i);
                    }
                }
            }
        }
        uf.components()
    }

    /// Hashes whose postings span at least `threshold` coauthor components.
    pub fn compute_common_hashes(&self, threshold: usize) -> CommonHashSet {
        let threshold = threshold.max(1);
        let hashes = self
            .postings
            .par_iter()
            .filter(|(_, list)| list.len() >= threshold)
            .filter(|(_, list)| self.components_of(list) >= threshold)
            .map(|(&h, _)| h)
            .collect();
        CommonHashSet { hashes, component_threshold: threshold }
    }

    fn filtered<'a>(
        hashes: &'a [u64],
        commons: &'a CommonHashSet,
        include_common: bool,
    ) -> impl Iterator<Item = u64> + 'a {
        hashes.iter().copied().filter(move |h| include_common || !commons.contains(*h))
    }

    /// Shared hashes between two indexed documents.
    pub fn overlap_count(
        &self,
        doc_a: &str,
        doc_b: &str,
        commons: &CommonHashSet,
        include_common: bool,
    ) -> Result<usize, IndexError> {
        let a = &self.docs[self.slot(doc_a)? as usize].hashes;
        let b = &self.docs[self.slot(doc_b)? as usize].hashes;
        Ok(sorted_intersection(a, b)
            .filter(|h| include_common || !commons.contains(*h))
            .count())
    }

    /// Documents sharing at least `min_shared` uncommon hashes with `doc_id`,
    /// by descending count then id.
    pub fn query_overlaps(
        &self,
        doc_id: &str,
        min_shared: usize,
        commons: &CommonHashSet,
    ) -> Result<Vec<(String, usize)>, IndexError> {
        let slot = self.slot(doc_id)?;
        Ok(self.query_slots(&self.docs[slot as usize].hashes, Some(slot), min_shared, commons))
    }

    /// Like [`query_overlaps`](Self::query_overlaps) for a fingerprint that is not indexed.
    pub fn query_hashes(
        &self,
        hashes: &[u64],
        min_shared: usize,
        commons: &CommonHashSet,
    ) -> Vec<(String, usize)> {
        self.query_slots(hashes, None, min_shared, commons)
    }

    fn query_slots(
        &self,
        hashes: &[u64],
        exclude: Option<u32>,
        min_shared: usize,
        commons: &CommonHashSet,
    ) -> Vec<(String, usize)> {
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for h in Self::filtered(hashes, commons, false) {
            for &s in self.postings.get(&h).into_iter().flatten() {
                if Some(s) != exclude {
                    *counts.entry(s).or_default() += 1;
                }
            }
        }
        let mut out: Vec<(String, usize)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_shared.max(1))
            .map(|(s, c)| (self.docs[s as usize].id.clone(), c))
            .collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }

    /// Approximate heap bytes held by the index.
    pub fn memory_footprint(&self) -> usize {
        use std::mem::size_of;
        let postings: usize = self
            .postings
            .values()
            .map(|l| size_of::<u64>() + size_of::<Vec<u32>>() + l.capacity() * size_of::<u32>())
            .sum();
        let docs: usize = self
            .docs
            .iter()
            .map(|d| {
                size_of::<DocEntry>()
                    + d.id.capacity()
                    + d.authors.capacity() * size_of::<u32>()
                    + d.hashes.capacity() * size_of::<u64>()
            })
            .sum();
        let authors: usize = self.author_keys.iter().map(|a| a.capacity() * 2 + 32).sum();
        postings + docs + authors + self.slots.len() * (size_of::<String>() + 4)
    }
}

/// Elements present in both sorted, duplicate-free slices.
pub fn sorted_intersection<'a>(a: &'a [u64], b: &'a [u64]) -> impl Iterator<Item = u64> + 'a {
    let (mut i, mut j) = (0, 0);
    std::iter::from_fn(move || {
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let v = a[i];
                    i += 1;
                    j += 1;
                    return Some(v);
                }
            }
        }
        None
    })
}
