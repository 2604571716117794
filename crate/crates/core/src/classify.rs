//! Overlap classification, flagging and incremental screening.
//!
//! An overlapping pair is Common Author (AU) when the documents share an
//! author, Cited (CI) when they share none but one cites the other, and
//! Uncited (UN) otherwise. Severity increases in that order. A document is
//! flagged with the most severe mode for which some chronologically earlier
//! document shares at least the mode's threshold of uncommon hashes.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{DocKind, Document, DocumentStore};
use crate::fingerprint::{fingerprint_document, Fingerprint};
use crate::index::{sorted_intersection, CommonHashSet, IndexError, InsertMode, PostingsIndex};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("unknown document `{0}`")]
    UnknownDoc(String),
    #[error("document `{0}` has no hashes to measure")]
    EmptyFingerprint(String),
    #[error("invalid flag policy: {0}")]
    InvalidPolicy(String),
    #[error(transparent)]
    Index(#[from] IndexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ReuseMode {
    #[serde(rename = "AU")]
    CommonAuthor,
    #[serde(rename = "CI")]
    Cited,
    #[serde(rename = "UN")]
    Uncited,
}

impl ReuseMode {
    /// All modes, least severe first.
    pub const ALL: [ReuseMode; 3] = [ReuseMode::CommonAuthor, ReuseMode::Cited, ReuseMode::Uncited];

    pub fn code(self) -> &'static str {
        match self {
            ReuseMode::CommonAuthor => "AU",
            ReuseMode::Cited => "CI",
            ReuseMode::Uncited => "UN",
        }
    }

    pub fn from_code(code: &str) -> Option<ReuseMode> {
        ReuseMode::ALL.into_iter().find(|m| m.code().eq_ignore_ascii_case(code))
    }
}

impl std::fmt::Display for ReuseMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

/// Known false-positive patterns attached to a pair for human review.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Annotation {
    /// Authors of both sides wrote an earlier document together.
    PriorCollaboration,
    /// The text passed to the later authors through an intermediate coauthored document.
    InheritedText,
    /// The earlier document was revised after the later one first appeared.
    ReverseDirectionRisk,
    /// The shared text also appears in an older document by unrelated authors.
    CommonSourceRisk,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapRecord {
    pub earlier_id: String,
    pub later_id: String,
    pub shared_uncommon: usize,
    pub shared_total: usize,
    pub mode: ReuseMode,
    #[serde(default)]
    pub annotations: BTreeSet<Annotation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlagPolicy {
    pub au_threshold: usize,
    pub ci_threshold: usize,
    pub un_threshold: usize,
    /// Suppress AU flags on review-type documents.
    pub review_excluded: bool,
    pub duplicate_cut: f64,
    pub conversion_cut: f64,
}

impl Default for FlagPolicy {
    fn default() -> Self {
        FlagPolicy {
            au_threshold: 100,
            ci_threshold: 20,
            un_threshold: 20,
            review_excluded: true,
            duplicate_cut: 0.95,
            conversion_cut: 0.05,
        }
    }
}

impl FlagPolicy {
    pub fn validate(&self) -> Result<(), ClassifyError> {
        if self.au_threshold == 0 || self.ci_threshold == 0 || self.un_threshold == 0 {
            return Err(ClassifyError::InvalidPolicy("thresholds must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.conversion_cut)
            || !(0.0..=1.0).contains(&self.duplicate_cut)
            || self.duplicate_cut <= self.conversion_cut
        {
            return Err(ClassifyError::InvalidPolicy(
                "cuts must lie in [0, 1] with duplicate_cut > conversion_cut".into(),
            ));
        }
        Ok(())
    }

    pub fn threshold(&self, mode: ReuseMode) -> usize {
        match mode {
            ReuseMode::CommonAuthor => self.au_threshold,
            ReuseMode::Cited => self.ci_threshold,
            ReuseMode::Uncited => self.un_threshold,
        }
    }

    pub fn min_threshold(&self) -> usize {
        self.au_threshold.min(self.ci_threshold).min(self.un_threshold)
    }
}

/// Read-only view shared by classification and analytics.
#[derive(Clone, Copy)]
pub struct ReuseContext<'a> {
    pub store: &'a DocumentStore,
    pub index: &'a PostingsIndex,
    pub commons: &'a CommonHashSet,
}

impl<'a> ReuseContext<'a> {
    pub fn new(store: &'a DocumentStore, index: &'a PostingsIndex, commons: &'a CommonHashSet) -> Self {
        ReuseContext { store, index, commons }
    }

    pub fn doc(&self, id: &str) -> Result<&'a Document, ClassifyError> {
        self.store.get(id).ok_or_else(|| ClassifyError::UnknownDoc(id.to_string()))
    }

    fn uncommon_shared(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        sorted_intersection(a, b).filter(|h| !self.commons.contains(*h)).collect()
    }
}

pub fn classify_pair(earlier: &Document, later: &Document) -> ReuseMode {
    if earlier.shares_author(later) {
        ReuseMode::CommonAuthor
    } else if later.cites(earlier) || earlier.cites(later) {
        ReuseMode::Cited
    } else {
        ReuseMode::Uncited
    }
}

/// Orders two documents in time, returning `(earlier, later)`.
pub fn chronological<'d>(a: &'d Document, b: &'d Document) -> (&'d Document, &'d Document) {
    if a.chrono_key() <= b.chrono_key() {
        (a, b)
    } else {
        (b, a)
    }
}

fn annotate(
    earlier: &Document,
    later: &Document,
    mode: ReuseMode,
    shared: &[u64],
    ctx: &ReuseContext<'_>,
) -> BTreeSet<Annotation> {
    let mut out = BTreeSet::new();
    let skip = |d: &Document| d.id == earlier.id || d.id == later.id;

    if mode != ReuseMode::CommonAuthor {
        let bridges: Vec<&Document> = later
            .authors
            .iter()
            .flat_map(|a| ctx.store.docs_by_author(a))
            .filter(|d| !skip(d) && d.chrono_key() < later.chrono_key() && d.shares_author(earlier))
            .collect();
        if !bridges.is_empty() {
            out.insert(Annotation::PriorCollaboration);
        }
        let carries_text = |d: &Document| {
            ctx.index
                .doc_hashes(&d.id)
                .is_ok_and(|hs| sorted_intersection(hs, shared).next().is_some())
        };
        if bridges
            .iter()
            .any(|d| d.chrono_key() > earlier.chrono_key() && carries_text(d))
        {
            out.insert(Annotation::InheritedText);
        }
    }

    if earlier.revised_date.is_some_and(|r| r > later.submit_date) {
        out.insert(Annotation::ReverseDirectionRisk);
    }

    let common_source = shared.iter().any(|&h| {
        ctx.index.postings(h).into_iter().any(|id| {
            ctx.store.get(id).is_some_and(|s| {
                !skip(s)
                    && s.chrono_key() < earlier.chrono_key()
                    && !s.shares_author(earlier)
                    && !s.shares_author(later)
            })
        })
    });
    if common_source {
        out.insert(Annotation::CommonSourceRisk);
    }
    out
}

/// Special-case annotations for a classified record.
pub fn annotate_special_cases(
    rec: &OverlapRecord,
    ctx: &ReuseContext<'_>,
) -> Result<BTreeSet<Annotation>, ClassifyError> {
    let earlier = ctx.doc(&rec.earlier_id)?;
    let later = ctx.doc(&rec.later_id)?;
    let shared = ctx.uncommon_shared(
        ctx.index.doc_hashes(&earlier.id)?,
        ctx.index.doc_hashes(&later.id)?,
    );
    Ok(annotate(earlier, later, rec.mode, &shared, ctx))
}

/// Builds the classified, annotated record for two indexed documents.
pub fn overlap_record(a: &str, b: &str, ctx: &ReuseContext<'_>) -> Result<OverlapRecord, ClassifyError> {
    let (earlier, later) = chronological(ctx.doc(a)?, ctx.doc(b)?);
    let ha = ctx.index.doc_hashes(&earlier.id)?;
    let hb = ctx.index.doc_hashes(&later.id)?;
    let shared_total = sorted_intersection(ha, hb).count();
    let shared = ctx.uncommon_shared(ha, hb);
    let mode = classify_pair(earlier, later);
    Ok(OverlapRecord {
        earlier_id: earlier.id.clone(),
        later_id: later.id.clone(),
        shared_uncommon: shared.len(),
        shared_total,
        mode,
        annotations: annotate(earlier, later, mode, &shared, ctx),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReuseVariant {
    /// Common hashes removed from numerator and denominator.
    UncommonOnly,
    IncludeCommon,
}

/// Share of a document's hashes already present in some earlier document.
pub fn fractional_reuse(
    doc_id: &str,
    ctx: &ReuseContext<'_>,
    variant: ReuseVariant,
) -> Result<f64, ClassifyError> {
    let doc = ctx.doc(doc_id)?;
    let hashes = ctx.index.doc_hashes(doc_id)?;
    let mut total = 0usize;
    let mut seen = 0usize;
    for &h in hashes {
        if variant == ReuseVariant::UncommonOnly && ctx.commons.contains(h) {
            continue;
        }
        total += 1;
        if ctx.index.seen_before(h, doc.submit_date, &doc.id) {
            seen += 1;
        }
    }
    if total == 0 {
        return Err(ClassifyError::EmptyFingerprint(doc_id.to_string()));
    }
    Ok(seen as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEvidence {
    pub other_id: String,
    pub mode: ReuseMode,
    pub shared_uncommon: usize,
    pub shared_total: usize,
    pub annotations: BTreeSet<Annotation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlagDecision {
    pub doc_id: String,
    pub flag: Option<ReuseMode>,
    /// Qualifying pairs, most severe first.
    pub evidence: Vec<PairEvidence>,
    /// Earlier documents this one nearly duplicates; never flagged.
    pub duplicates: Vec<String>,
}

impl FlagDecision {
    /// Modes with at least one qualifying pair.
    pub fn modes(&self) -> BTreeSet<ReuseMode> {
        self.evidence.iter().map(|e| e.mode).collect()
    }
}

/// Minimal pair description for the flag rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCandidate {
    pub mode: ReuseMode,
    pub shared_uncommon: usize,
    pub duplicate: bool,
}

/// Whether a single pair counts toward a flag under `policy`.
pub fn pair_qualifies(pair: &PairCandidate, kind: DocKind, policy: &FlagPolicy) -> bool {
    !pair.duplicate
        && pair.shared_uncommon >= policy.threshold(pair.mode)
        && !(pair.mode == ReuseMode::CommonAuthor
            && kind == DocKind::ReviewType
            && policy.review_excluded)
}

/// Most severe qualifying mode among `pairs`.
pub fn decide(pairs: &[PairCandidate], kind: DocKind, policy: &FlagPolicy) -> Option<ReuseMode> {
    pairs
        .iter()
        .filter(|p| pair_qualifies(p, kind, policy))
        .map(|p| p.mode)
        .max()
}

/// Flags a document given its hashes, against chronologically earlier indexed documents.
///
/// The document itself need not be indexed.
pub fn assess(
    doc: &Document,
    hashes: &[u64],
    ctx: &ReuseContext<'_>,
    policy: &FlagPolicy,
) -> Result<FlagDecision, ClassifyError> {
    let mut evidence = Vec::new();
    let mut duplicates = Vec::new();
    for (other_id, shared_uncommon) in ctx.index.query_hashes(hashes, policy.min_threshold(), ctx.commons) {
        if other_id == doc.id {
            continue;
        }
        let other = ctx.doc(&other_id)?;
        if other.chrono_key() >= doc.chrono_key() {
            continue;
        }
        let other_hashes = ctx.index.doc_hashes(&other_id)?;
        let shared_total = sorted_intersection(hashes, other_hashes).count();
        let larger = hashes.len().max(other_hashes.len()).max(1);
        let duplicate = shared_total as f64 / larger as f64 >= policy.duplicate_cut;
        let mode = classify_pair(other, doc);
        let candidate = PairCandidate { mode, shared_uncommon, duplicate };
        if duplicate {
            duplicates.push(other_id);
            continue;
        }
        if pair_qualifies(&candidate, doc.kind, policy) {
            let shared = ctx.uncommon_shared(hashes, other_hashes);
            evidence.push(PairEvidence {
                annotations: annotate(other, doc, mode, &shared, ctx),
                other_id,
                mode,
                shared_uncommon,
                shared_total,
            });
        }
    }
    evidence.sort_by(|a, b| {
        b.mode
            .cmp(&a.mode)
            .then(b.shared_uncommon.cmp(&a.shared_uncommon))
            .then_with(|| a.other_id.cmp(&b.other_id))
    });
    duplicates.sort();
    Ok(FlagDecision {
        doc_id: doc.id.clone(),
        flag: evidence.iter().map(|e| e.mode).max(),
        evidence,
        duplicates,
    })
}

pub fn flag_document(
    doc_id: &str,
    ctx: &ReuseContext<'_>,
    policy: &FlagPolicy,
) -> Result<FlagDecision, ClassifyError> {
    let doc = ctx.doc(doc_id)?;
    assess(doc, ctx.index.doc_hashes(doc_id)?, ctx, policy)
}

/// Flag decisions for every stored document, in id order.
pub fn flag_all(ctx: &ReuseContext<'_>, policy: &FlagPolicy) -> Result<Vec<FlagDecision>, ClassifyError> {
    let ids: Vec<&str> = ctx.store.iter().map(|d| d.id.as_str()).collect();
    ids.par_iter().map(|id| flag_document(id, ctx, policy)).collect()
}

/// All pairs sharing at least `min_shared` uncommon hashes, as classified records.
///
/// Pairs touching a large-collaboration document are left out. Records are
/// ordered by the later document's submission, then the earlier id.
pub fn scan_overlaps(ctx: &ReuseContext<'_>, min_shared: usize) -> Result<Vec<OverlapRecord>, ClassifyError> {
    let docs = ctx.store.chronological();
    let per_doc: Vec<Vec<OverlapRecord>> = docs
        .par_iter()
        .filter(|d| d.kind != DocKind::LargeCollaboration && ctx.index.contains(&d.id))
        .map(|later| -> Result<Vec<OverlapRecord>, ClassifyError> {
            let mut out = Vec::new();
            for (other_id, _) in ctx.index.query_overlaps(&later.id, min_shared, ctx.commons)? {
                let other = ctx.doc(&other_id)?;
                if other.kind == DocKind::LargeCollaboration || other.chrono_key() >= later.chrono_key() {
                    continue;
                }
                out.push(overlap_record(&other.id, &later.id, ctx)?);
            }
            out.sort_by(|a, b| a.earlier_id.cmp(&b.earlier_id));
            Ok(out)
        })
        .collect::<Result<_, _>>()?;
    Ok(per_doc.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotePair {
    pub other_id: String,
    pub mode: ReuseMode,
    pub shared_uncommon: usize,
    pub annotations: Vec<Annotation>,
}

/// Flag attached to a screened submission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdminNote {
    pub id: String,
    pub mode: ReuseMode,
    pub pairs: Vec<NotePair>,
    pub note: String,
}

impl AdminNote {
    pub fn from_decision(decision: &FlagDecision) -> Option<AdminNote> {
        let mode = decision.flag?;
        let others: Vec<&str> = decision.evidence.iter().map(|e| e.other_id.as_str()).collect();
        Some(AdminNote {
            id: decision.doc_id.clone(),
            mode,
            pairs: decision
                .evidence
                .iter()
                .map(|e| NotePair {
                    other_id: e.other_id.clone(),
                    mode: e.mode,
                    shared_uncommon: e.shared_uncommon,
                    annotations: e.annotations.iter().copied().collect(),
                })
                .collect(),
            note: format!("text overlap with {}", others.join(", ")),
        })
    }

    /// Single-line comments field, e.g. `1234: admin note [UN]: text overlap with 0042`.
    pub fn render_text(&self) -> String {
        format!("{}: admin note [{}]: {}", self.id, self.mode, self.note)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScreenOptions {
    pub component_threshold: usize,
    /// Recompute common hashes after this many inserts.
    pub commons_refresh_every: usize,
    /// Treat an already-present id as a new version instead of an error.
    pub replace_existing: bool,
}

impl Default for ScreenOptions {
    fn default() -> Self {
        ScreenOptions {
            component_threshold: crate::index::DEFAULT_COMPONENT_THRESHOLD,
            commons_refresh_every: 10_000,
            replace_existing: false,
        }
    }
}

/// Mutable state the screener appends to.
pub struct ScreenState<'a> {
    pub store: &'a mut DocumentStore,
    pub index: &'a mut PostingsIndex,
    pub commons: &'a mut CommonHashSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenFailure {
    pub id: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenReport {
    pub screened: usize,
    pub notes: Vec<AdminNote>,
    pub decisions: Vec<FlagDecision>,
    pub errors: Vec<ScreenFailure>,
    pub commons_refreshes: usize,
}

/// Screens new submissions in order: flag against the current index, then insert.
///
/// Per-document failures are collected and do not stop the batch. Arrival
/// order should follow submission order, since each document is only
/// compared with documents that are both indexed and dated earlier.
pub fn screen_batch(
    new_docs: Vec<Document>,
    state: &mut ScreenState<'_>,
    policy: &FlagPolicy,
    opts: &ScreenOptions,
) -> Result<ScreenReport, ClassifyError> {
    policy.validate()?;
    let cfg = *state.index.config();
    let fingerprints: Vec<Fingerprint> = new_docs.par_iter().map(|d| fingerprint_document(d, &cfg)).collect();

    let mut report = ScreenReport::default();
    let mut since_refresh = 0usize;
    for (doc, fp) in new_docs.into_iter().zip(fingerprints) {
        if state.store.contains(&doc.id) && !opts.replace_existing {
            report.errors.push(ScreenFailure {
                id: doc.id.clone(),
                error: IndexError::DuplicateId(doc.id).to_string(),
            });
            continue;
        }
        let decision = {
            let ctx = ReuseContext::new(state.store, state.index, state.commons);
            match assess(&doc, &fp.hash_set, &ctx, policy) {
                Ok(d) => d,
                Err(e) => {
                    report.errors.push(ScreenFailure { id: doc.id.clone(), error: e.to_string() });
                    continue;
                }
            }
        };
        let mode = if opts.replace_existing { InsertMode::Replace } else { InsertMode::Insert };
        if let Err(e) = state.index.add_document(&fp, &doc, mode) {
            report.errors.push(ScreenFailure { id: doc.id.clone(), error: e.to_string() });
            continue;
        }
        state.store.replace(doc);
        report.screened += 1;
        if let Some(note) = AdminNote::from_decision(&decision) {
            report.notes.push(note);
        }
        report.decisions.push(decision);

        since_refresh += 1;
        if since_refresh >= opts.commons_refresh_every.max(1) {
            *state.commons = state.index.compute_common_hashes(opts.component_threshold);
            report.commons_refreshes += 1;
            since_refresh = 0;
        }
    }
    Ok(report)
}

/// Per-document qualifying modes, keyed by id.
pub fn qualifying_modes(decisions: &[FlagDecision]) -> BTreeMap<String, BTreeSet<ReuseMode>> {
    decisions.iter().map(|d| (d.doc_id.clone(), d.modes())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use crate::fingerprint::FingerprintConfig;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn doc(id: &str, authors: &[&str], day: u32, text: &str) -> Document {
        Document {
            id: id.to_string(),
            title: None,
            authors: authors.iter().map(|a| a.to_string()).collect(),
            submit_date: NaiveDate::from_ymd_opt(2010, 1, 1).unwrap() + chrono::Days::new(day as u64),
            revised_date: None,
            comments: String::new(),
            submitter_country: "UNKNOWN".into(),
            cited_ids: BTreeSet::new(),
            collaboration: None,
            kind: DocKind::Normal,
            tokens: tokenize(text),
        }
    }

    fn words(prefix: &str, n: usize) -> String {
        (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>().join(" ")
    }

    struct Fixture {
        store: DocumentStore,
        index: PostingsIndex,
        commons: CommonHashSet,
    }

    impl Fixture {
        fn new(docs: Vec<Document>) -> Self {
            let cfg = FingerprintConfig::default();
            let mut store = DocumentStore::new();
            let mut index = PostingsIndex::new(cfg);
            for d in docs {
                index.add_document(&fingerprint_document(&d, &cfg), &d, InsertMode::Insert).unwrap();
                store.insert(d).unwrap();
            }
            let commons = index.compute_common_hashes(4);
            Fixture { store, index, commons }
        }
        fn ctx(&self) -> ReuseContext<'_> {
            ReuseContext::new(&self.store, &self.index, &self.commons)
        }
    }

    #[test]
    fn pair_modes() {
        let a = doc("a", &["a smith"], 1, "");
        let b = doc("b", &["a smith", "b jones"], 2, "");
        assert_eq!(classify_pair(&a, &b), ReuseMode::CommonAuthor);
        let mut c = doc("c", &["c other"], 3, "");
        assert_eq!(classify_pair(&a, &c), ReuseMode::Uncited);
        c.cited_ids.insert("a".into());
        assert_eq!(classify_pair(&a, &c), ReuseMode::Cited);
        let mut a2 = a.clone();
        a2.cited_ids.insert("c".into());
        assert_eq!(classify_pair(&a2, &doc("c", &["c other"], 3, "")), ReuseMode::Cited);
    }

    #[test]
    fn severity_order() {
        assert!(ReuseMode::Uncited > ReuseMode::Cited && ReuseMode::Cited > ReuseMode::CommonAuthor);
        assert_eq!(ReuseMode::from_code("un"), Some(ReuseMode::Uncited));
        assert_eq!(serde_json::to_string(&ReuseMode::Cited).unwrap(), "\"CI\"");
    }

    #[test]
    fn policy_validation() {
        assert!(FlagPolicy::default().validate().is_ok());
        let bad = FlagPolicy { duplicate_cut: 0.04, ..FlagPolicy::default() };
        assert!(bad.validate().is_err());
        let bad = FlagPolicy { ci_threshold: 0, ..FlagPolicy::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn decision_thresholds() {
        let p = FlagPolicy::default();
        let c = |mode, shared_uncommon| PairCandidate { mode, shared_uncommon, duplicate: false };
        assert_eq!(decide(&[c(ReuseMode::CommonAuthor, 120)], DocKind::Normal, &p), Some(ReuseMode::CommonAuthor));
        assert_eq!(decide(&[c(ReuseMode::Uncited, 25)], DocKind::Normal, &p), Some(ReuseMode::Uncited));
        assert_eq!(decide(&[c(ReuseMode::CommonAuthor, 50)], DocKind::Normal, &p), None);
        assert_eq!(decide(&[c(ReuseMode::CommonAuthor, 120)], DocKind::ReviewType, &p), None);
        assert_eq!(
            decide(&[c(ReuseMode::CommonAuthor, 500), c(ReuseMode::Cited, 20)], DocKind::Normal, &p),
            Some(ReuseMode::Cited)
        );
        let dup = PairCandidate { mode: ReuseMode::Uncited, shared_uncommon: 900, duplicate: true };
        assert_eq!(decide(&[dup], DocKind::Normal, &p), None);
    }

    #[test]
    fn fractional_reuse_cases() {
        let original = words("o", 400);
        let half: String = format!("{} {}", words("o", 200), words("fresh", 200));
        let fx = Fixture::new(vec![
            doc("orig", &["p"], 1, &original),
            doc("dup", &["q"], 2, &original),
            doc("unique", &["r"], 3, &words("u", 300)),
            doc("half", &["s"], 4, &half),
            doc("empty", &["t"], 5, "too short"),
        ]);
        let ctx = fx.ctx();
        for v in [ReuseVariant::UncommonOnly, ReuseVariant::IncludeCommon] {
            assert_eq!(fractional_reuse("dup", &ctx, v).unwrap(), 1.0);
            assert_eq!(fractional_reuse("orig", &ctx, v).unwrap(), 0.0);
        }
        assert_eq!(fractional_reuse("unique", &ctx, ReuseVariant::UncommonOnly).unwrap(), 0.0);
        let f = fractional_reuse("half", &ctx, ReuseVariant::UncommonOnly).unwrap();
        assert!((f - 0.5).abs() <= 0.08, "{f}");
        assert!(matches!(
            fractional_reuse("empty", &ctx, ReuseVariant::UncommonOnly),
            Err(ClassifyError::EmptyFingerprint(_))
        ));
    }

    /// Builds a later doc sharing exactly `shared` hashes with `base`'s fingerprint
    /// by copying base text until the count is reached.
    fn copy_with_shared(base: &Document, target: usize, cfg: &FingerprintConfig) -> String {
        let toks = &base.tokens.tokens;
        let mut n = cfg.t;
        loop {
            let text = format!("{} {}", words("zz", 50), toks[..n].join(" "));
            let probe = doc("probe", &[], 0, &text);
            let fp_probe = fingerprint_document(&probe, cfg);
            let fp_base = fingerprint_document(base, cfg);
            let shared = sorted_intersection(&fp_probe.hash_set, &fp_base.hash_set).count();
            if shared >= target {
                assert_eq!(shared, target, "could not hit exact count");
                return text;
            }
            n += 1;
        }
    }

    #[test]
    fn flag_document_end_to_end() {
        let cfg = FingerprintConfig::default();
        let base = doc("base", &["a"], 1, &words("b", 2000));
        let au_text = copy_with_shared(&base, 120, &cfg);
        let un_text = copy_with_shared(&base, 25, &cfg).replace("zz", "yy");
        let low_text = copy_with_shared(&base, 50, &cfg).replace("zz", "xx");
        let fx = Fixture::new(vec![
            base.clone(),
            doc("au", &["a", "b"], 2, &au_text),
            doc("un", &["c"], 3, &un_text),
        ]);
        let ctx = fx.ctx();
        let p = FlagPolicy::default();
        let au = flag_document("au", &ctx, &p).unwrap();
        assert_eq!(au.flag, Some(ReuseMode::CommonAuthor));
        assert_eq!(au.evidence[0].shared_uncommon, 120);
        let un = flag_document("un", &ctx, &p).unwrap();
        assert_eq!(un.flag, Some(ReuseMode::Uncited));
        let low_fx = Fixture::new(vec![base.clone(), doc("low", &["a"], 4, &low_text)]);
        assert_eq!(flag_document("low", &low_fx.ctx(), &p).unwrap().flag, None);
        assert_eq!(flag_document("base", &ctx, &p).unwrap().flag, None);
        assert!(matches!(flag_document("nope", &ctx, &p), Err(ClassifyError::UnknownDoc(_))));
        let note = AdminNote::from_decision(&un).unwrap();
        let others: Vec<&str> = un.evidence.iter().map(|e| e.other_id.as_str()).collect();
        assert!(others.contains(&"base"));
        assert_eq!(note.note, format!("text overlap with {}", others.join(", ")));
        assert_eq!(note.render_text(), format!("un: admin note [UN]: {}", note.note));
    }

    #[test]
    fn duplicates_are_not_flagged() {
        let t = words("w", 600);
        let fx = Fixture::new(vec![doc("v1", &["a"], 1, &t), doc("v2", &["b"], 2, &t)]);
        let d = flag_document("v2", &fx.ctx(), &FlagPolicy::default()).unwrap();
        assert_eq!(d.flag, None);
        assert_eq!(d.duplicates, vec!["v1".to_string()]);
    }

    #[test]
    fn special_case_annotations() {
        let block = words("blk", 300);
        // Case a/b: {A,B} writes the block, {A,C} reuses it, {C,D} reuses it again.
        let e = doc("e", &["A", "B"], 1, &format!("{} {}", words("e", 100), block));
        let m = doc("m", &["A", "C"], 2, &format!("{} {}", words("m", 100), block));
        let l = doc("l", &["C", "D"], 3, &format!("{} {}", words("l", 100), block));
        // Case d: older third document by unrelated authors holds a second block.
        let src_block = words("src", 200);
        let s = doc("s", &["X"], 4, &src_block);
        let p = doc("p", &["P"], 5, &format!("{} {}", words("p", 100), src_block));
        let mut q = doc("q", &["Q"], 6, &format!("{} {}", src_block, words("q", 100)));
        q.cited_ids.insert("p".into());
        let fx = Fixture::new(vec![e, m, l, s, p, q]);
        let ctx = fx.ctx();

        let rec = overlap_record("e", "l", &ctx).unwrap();
        assert_eq!(rec.mode, ReuseMode::Uncited);
        assert!(rec.annotations.contains(&Annotation::PriorCollaboration));
        assert!(rec.annotations.contains(&Annotation::InheritedText));
        assert!(!rec.annotations.contains(&Annotation::CommonSourceRisk));
        assert_eq!(annotate_special_cases(&rec, &ctx).unwrap(), rec.annotations);

        let rec = overlap_record("q", "p", &ctx).unwrap();
        assert_eq!((rec.earlier_id.as_str(), rec.mode), ("p", ReuseMode::Cited));
        assert!(rec.annotations.contains(&Annotation::CommonSourceRisk));
        assert!(!rec.annotations.contains(&Annotation::PriorCollaboration));
    }

    #[test]
    fn prior_collaboration_without_text() {
        let block = words("blk", 300);
        let fx = Fixture::new(vec![
            doc("ab", &["A", "B"], 1, &block),
            doc("ac", &["A", "C"], 2, &words("other", 100)),
            doc("cd", &["C", "D"], 3, &block),
        ]);
        let rec = overlap_record("ab", "cd", &fx.ctx()).unwrap();
        assert!(rec.annotations.contains(&Annotation::PriorCollaboration));
        assert!(!rec.annotations.contains(&Annotation::InheritedText));
    }

    #[test]
    fn reverse_direction_risk() {
        let block = words("blk", 300);
        let mut a = doc("a", &["A"], 1, &block);
        a.revised_date = Some(NaiveDate::from_ymd_opt(2011, 1, 1).unwrap());
        let b = doc("b", &["B"], 10, &block);
        let fx = Fixture::new(vec![a, b]);
        let rec = overlap_record("a", "b", &fx.ctx()).unwrap();
        assert!(rec.annotations.contains(&Annotation::ReverseDirectionRisk));
    }

    #[test]
    fn screening_flags_then_inserts() {
        let base_text = words("b", 1500);
        let mut fx = Fixture::new(vec![doc("base", &["a"], 1, &base_text)]);
        let copy = doc("copy", &["a"], 2, &format!("{} {}", words("n", 300), base_text));
        let fresh = doc("fresh", &["z"], 3, &words("f", 800));
        let dup_id = doc("base", &["a"], 4, &words("g", 100));
        let mut state = ScreenState { store: &mut fx.store, index: &mut fx.index, commons: &mut fx.commons };
        let report = screen_batch(
            vec![copy, fresh, dup_id],
            &mut state,
            &FlagPolicy::default(),
            &ScreenOptions::default(),
        )
        .unwrap();
        assert_eq!(report.screened, 2);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.notes.len(), 1);
        assert_eq!(report.notes[0].id, "copy");
        assert_eq!(report.notes[0].mode, ReuseMode::CommonAuthor);
        assert_eq!(report.notes[0].pairs[0].other_id, "base");
        assert!(fx.index.contains("copy") && fx.store.contains("fresh"));
    }

    #[test]
    fn scan_records_each_pair_once() {
        let block = words("blk", 200);
        let fx = Fixture::new(vec![
            doc("a", &["A"], 1, &block),
            doc("b", &["B"], 2, &format!("{} {}", block, words("b", 50))),
            doc("c", &["A"], 3, &format!("{} {}", words("c", 50), block)),
        ]);
        let recs = scan_overlaps(&fx.ctx(), 10).unwrap();
        let pairs: Vec<(&str, &str, ReuseMode)> =
            recs.iter().map(|r| (r.earlier_id.as_str(), r.later_id.as_str(), r.mode)).collect();
        assert_eq!(
            pairs,
            vec![("a", "b", ReuseMode::Uncited), ("a", "c", ReuseMode::CommonAuthor), ("b", "c", ReuseMode::Uncited)]
        );
        assert!(recs.iter().all(|r| r.shared_uncommon <= r.shared_total));
    }

    proptest! {
        #[test]
        fn flag_is_monotone_in_shared_counts(
            counts in prop::collection::vec((0usize..3, 0usize..200), 1..6),
            bump_at in 0usize..6,
            bump in 0usize..150,
            review in any::<bool>(),
        ) {
            let p = FlagPolicy::default();
            let kind = if review { DocKind::ReviewType } else { DocKind::Normal };
            let pairs: Vec<PairCandidate> = counts
                .iter()
                .map(|&(m, s)| PairCandidate { mode: ReuseMode::ALL[m], shared_uncommon: s, duplicate: false })
                .collect();
            let before = decide(&pairs, kind, &p);
            let mut bumped = pairs.clone();
            let i = bump_at % bumped.len();
            bumped[i].shared_uncommon += bump;
            let after = decide(&bumped, kind, &p);
            prop_assert!(after >= before);
        }

        #[test]
        fn classify_pair_partitions(ea in 0u8..4, eb in 0u8..4, cite in 0u8..3) {
            let mut a = doc("a", &[], 1, "");
            let mut b = doc("b", &[], 2, "");
            a.authors = (0..4).filter(|i| ea & (1 << i) != 0).map(|i| format!("x{i}")).collect();
            b.authors = (0..4).filter(|i| eb & (1 << (i % 2)) != 0).map(|i| format!("x{}", i + 1)).collect();
            match cite { 1 => { b.cited_ids.insert("a".into()); } 2 => { a.cited_ids.insert("b".into()); } _ => {} }
            let mode = classify_pair(&a, &b);
            let common = a.shares_author(&b);
            prop_assert_eq!(mode == ReuseMode::CommonAuthor, common);
            if mode == ReuseMode::Uncited {
                prop_assert!(!common && cite == 0);
            }
        }
    }
}
