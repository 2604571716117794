//! Binary index file.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes  "TXREUSE\0"
//! version      u8
//! config       k: u32, t: u32, exclude_quotes: u8
//! doc table    count: u64, then per doc (sorted by id):
//!                id: str, submit_date: i32 (days from CE),
//!                authors: u32 count + str each, fingerprint_size: u64
//! postings     count: u64, then per hash (ascending):
//!                hash: u64, n: u32, n doc-table indices (u32, ascending)
//! checksum     u64, XXH3 of every preceding byte
//! ```
//!
//! `str` is a u32 byte length followed by UTF-8. The layout is canonical:
//! two indexes holding the same documents serialize to identical bytes
//! regardless of insertion order.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use xxhash_rust::xxh3::xxh3_64;

use super::{IndexError, InsertMode, PostingsIndex};
use crate::fingerprint::FingerprintConfig;

pub const MAGIC: &[u8; 8] = b"TXREUSE\0";
pub const FORMAT_VERSION: u8 = 1;

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn i32(&mut self, v: i32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    data: &'a [u8],
    at: usize,
}

fn corrupt(msg: impl Into<String>) -> IndexError {
    IndexError::CorruptFile(msg.into())
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IndexError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.data.len());
        let end = end.ok_or_else(|| corrupt(format!("unexpected end of data at byte {}", self.at)))?;
        let s = &self.data[self.at..end];
        self.at = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8, IndexError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32, IndexError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn i32(&mut self) -> Result<i32, IndexError> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64, IndexError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn len(&mut self) -> Result<usize, IndexError> {
        let n = self.u64()?;
        // Every counted item takes at least four bytes.
        if n > (self.data.len() - self.at) as u64 / 4 + 1 {
            return Err(corrupt(format!("implausible count {n}")));
        }
        Ok(n as usize)
    }
    fn str(&mut self) -> Result<&'a str, IndexError> {
        let n = self.u32()? as usize;
        std::str::from_utf8(self.take(n)?).map_err(|_| corrupt("invalid UTF-8 string"))
    }
}

impl PostingsIndex {
    /// Serializes the index in canonical form.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer { buf: Vec::new() };
        w.buf.extend_from_slice(MAGIC);
        w.u8(FORMAT_VERSION);
        w.u32(self.config.k as u32);
        w.u32(self.config.t as u32);
        w.u8(self.config.exclude_quotes as u8);

        let mut order: Vec<usize> = (0..self.docs.len()).collect();
        order.sort_by(|&a, &b| self.docs[a].id.cmp(&self.docs[b].id));
        let mut canonical = vec![0u32; self.docs.len()];
        for (pos, &slot) in order.iter().enumerate() {
            canonical[slot] = pos as u32;
        }

        w.u64(order.len() as u64);
        for &slot in &order {
            let d = &self.docs[slot];
            w.str(&d.id);
            w.i32(d.submit_date.num_days_from_ce());
            let mut authors: Vec<&str> =
                d.authors.iter().map(|&a| self.author_keys[a as usize].as_str()).collect();
            authors.sort_unstable();
            w.u32(authors.len() as u32);
            for a in authors {
                w.str(a);
            }
            w.u64(d.hashes.len() as u64);
        }

        let postings: BTreeMap<u64, Vec<u32>> = self
            .postings
            .iter()
            .map(|(&h, list)| {
                let mut docs: Vec<u32> = list.iter().map(|&s| canonical[s as usize]).collect();
                docs.sort_unstable();
                (h, docs)
            })
            .collect();
        w.u64(postings.len() as u64);
        for (h, docs) in postings {
            w.u64(h);
            w.u32(docs.len() as u32);
            for d in docs {
                w.u32(d);
            }
        }

        let checksum = xxh3_64(&w.buf);
        w.u64(checksum);
        w.buf
    }

    pub fn from_bytes(data: &[u8]) -> Result<PostingsIndex, IndexError> {
        if data.len() < MAGIC.len() + 1 || &data[..MAGIC.len()] != MAGIC {
            return Err(corrupt("missing magic bytes"));
        }
        let version = data[MAGIC.len()];
        if version != FORMAT_VERSION {
            return Err(IndexError::VersionMismatch { found: version, expected: FORMAT_VERSION });
        }
        if data.len() < MAGIC.len() + 1 + 8 {
            return Err(corrupt("file too short"));
        }
        let (body, tail) = data.split_at(data.len() - 8);
        let stored = u64::from_le_bytes(tail.try_into().expect("8 bytes"));
        if xxh3_64(body) != stored {
            return Err(corrupt("checksum mismatch"));
        }

        let mut r = Reader { data: body, at: MAGIC.len() + 1 };
        let config = FingerprintConfig {
            k: r.u32()? as usize,
            t: r.u32()? as usize,
            exclude_quotes: match r.u8()? {
                0 => false,
                1 => true,
                v => return Err(corrupt(format!("bad flag byte {v}"))),
            },
        };
        config.validate().map_err(|e| corrupt(e.to_string()))?;

        struct Row {
            id: String,
            date: NaiveDate,
            authors: Vec<String>,
            size: usize,
        }
        let n_docs = r.len()?;
        let mut rows: Vec<Row> = Vec::with_capacity(n_docs);
        for _ in 0..n_docs {
            let id = r.str()?.to_string();
            let date = NaiveDate::from_num_days_from_ce_opt(r.i32()?)
                .ok_or_else(|| corrupt("date out of range"))?;
            let n_auth = r.u32()? as usize;
            let authors = (0..n_auth).map(|_| r.str().map(str::to_string)).collect::<Result<_, _>>()?;
            let size = r.u64()? as usize;
            if rows.last().is_some_and(|p: &Row| p.id >= id) {
                return Err(corrupt("doc table not sorted by id"));
            }
            rows.push(Row { id, date, authors, size });
        }

        let mut hashes: Vec<Vec<u64>> = vec![Vec::new(); n_docs];
        let n_postings = r.len()?;
        let mut prev: Option<u64> = None;
        for _ in 0..n_postings {
            let h = r.u64()?;
            if prev.is_some_and(|p| p >= h) {
                return Err(corrupt("postings not sorted by hash"));
            }
            prev = Some(h);
            let n = r.u32()? as usize;
            if n == 0 {
                return Err(corrupt("empty postings list"));
            }
            let mut last: Option<u32> = None;
            for _ in 0..n {
                let d = r.u32()?;
                if d as usize >= n_docs || last.is_some_and(|l| l >= d) {
                    return Err(corrupt("bad postings entry"));
                }
                last = Some(d);
                hashes[d as usize].push(h);
            }
        }
        if r.at != body.len() {
            return Err(corrupt("trailing bytes"));
        }

        let mut index = PostingsIndex::new(config);
        for (row, hs) in rows.into_iter().zip(hashes) {
            if hs.len() != row.size {
                return Err(corrupt(format!("fingerprint size mismatch for `{}`", row.id)));
            }
            // Hashes were pushed in ascending order, so each list is sorted.
            index.add_entry(&row.id, &row.authors, row.date, hs, InsertMode::Insert)?;
        }
        Ok(index)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IndexError> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(&self.to_bytes())?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PostingsIndex, IndexError> {
        let mut data = Vec::new();
        File::open(path)?.read_to_end(&mut data)?;
        Self::from_bytes(&data)
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::doc;
    use super::super::CommonHashSet;
    use super::*;
    use crate::fingerprint::fingerprint_document;

    fn sample() -> PostingsIndex {
        let shared: String = (0..80).map(|i| format!("s{i} ")).collect();
        let cfg = FingerprintConfig::default();
        let mut idx = PostingsIndex::new(cfg);
        for i in 0..12 {
            let own: String = (0..60).map(|j| format!("d{i}w{j} ")).collect();
            let text = if i % 3 == 0 { format!("{own}{shared}") } else { own };
            let d = doc(&format!("doc{:02}", 11 - i), &["a", &format!("b{}", i % 4)], 1 + i as u32, &text);
            idx.add_document(&fingerprint_document(&d, &cfg), &d, InsertMode::Insert).unwrap();
        }
        idx
    }

    #[test]
    fn round_trip_preserves_answers() {
        let idx = sample();
        let bytes = idx.to_bytes();
        let loaded = PostingsIndex::from_bytes(&bytes).unwrap();
        assert_eq!(loaded.to_bytes(), bytes);
        let none = CommonHashSet::empty(4);
        for id in idx.doc_ids() {
            assert_eq!(idx.query_overlaps(id, 1, &none).unwrap(), loaded.query_overlaps(id, 1, &none).unwrap());
            assert_eq!(idx.doc_info(id).unwrap().authors.len(), loaded.doc_info(id).unwrap().authors.len());
        }
        assert_eq!(idx.compute_common_hashes(2).sorted(), loaded.compute_common_hashes(2).sorted());
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let bytes = sample().to_bytes();
        for cut in [bytes.len() - 1, bytes.len() / 2, 12, 9, 3] {
            assert!(matches!(PostingsIndex::from_bytes(&bytes[..cut]), Err(IndexError::CorruptFile(_))), "{cut}");
        }
        let mut flipped = bytes.clone();
        flipped[40] ^= 0xff;
        assert!(matches!(PostingsIndex::from_bytes(&flipped), Err(IndexError::CorruptFile(_))));
    }

    #[test]
    fn bumped_version_is_rejected() {
        let mut bytes = sample().to_bytes();
        bytes[MAGIC.len()] += 1;
        assert!(matches!(
            PostingsIndex::from_bytes(&bytes),
            Err(IndexError::VersionMismatch { found: 2, expected: 1 })
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.bin");
        let idx = sample();
        idx.save(&path).unwrap();
        let loaded = PostingsIndex::load(&path).unwrap();
        assert_eq!(loaded.to_bytes(), idx.to_bytes());
    }
}
