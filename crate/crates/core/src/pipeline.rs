//! Pipeline stages over an output directory.
//!
//! | stage            | reads                         | writes                                   |
//! |------------------|-------------------------------|------------------------------------------|
//! | `ingest`         | corpus JSONL                  | `documents.jsonl`, `manifest.json`       |
//! | `index`          | `documents.jsonl`             | index file, `index_summary.json`         |
//! | `scan`           | documents, index              | `overlaps.jsonl`, `flags.jsonl`          |
//! | `screen`         | documents, index, batch JSONL | `admin_notes.{jsonl,txt}`, `screen_report.json`; updates documents and index |
//! | `report`         | documents, index              | `fig1.csv`, `fig2.csv`, `fig4.csv`, `fig5.{csv,json}`, `appendixE.{csv,json}`, `countries.csv` |
//! | `export-network` | documents, index              | `network.dot`, `network.json`            |
//!
//! Outputs depend only on the corpus and the configuration, never on paths,
//! thread count or wall-clock time.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::{
    author_flag_histogram, author_profiles, citation_dataset, citation_vs_reuse, country_inputs, country_metrics,
    cumulative_overlap_distribution, export_overlap_network, reuse_fraction_distribution, reuse_fractions,
    source_citation_vs_reuse, AnalyticsError, CitationAnalysis, CitationFilter, CountryMetric, OverlapNetwork,
    Partition,
};
use crate::classify::{
    flag_all, qualifying_modes, scan_overlaps, screen_batch, ClassifyError, FlagDecision, OverlapRecord,
    ReuseContext, ReuseMode, ReuseVariant, ScreenState,
};
use crate::config::{ConfigError, RunConfig};
use crate::corpus::{ingest_jsonl, CorpusError, Document, DocumentStore, IngestReport, LineError};
use crate::fingerprint::fingerprint_document;
use crate::index::{CommonHashSet, IndexError, InsertMode, PostingsIndex};

pub const DOCUMENTS_FILE: &str = "documents.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("missing input {0}; run the earlier stage first")]
    MissingInput(PathBuf),
    #[error("index {0} is locked by another process")]
    Locked(PathBuf),
    #[error("{path}:{line}: {message}")]
    BadLine { path: PathBuf, line: usize, message: String },
    #[error("no corpus path given")]
    NoCorpus,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
}

type Result<T> = std::result::Result<T, PipelineError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            PipelineError::MissingInput(path.to_path_buf())
        } else {
            PipelineError::Io { path: path.to_path_buf(), source: e }
        }
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    write_file(path, &s)
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for item in items {
        serde_json::to_writer(&mut out, &item).expect("value serializes");
        out.write_all(b"\n").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(io_err(&cfg.out_dir))?;
    Ok(&cfg.out_dir)
}

/// Exclusive advisory lock on `<index>.lock`, released on drop.
pub struct IndexLock {
    _file: File,
}

impl IndexLock {
    pub fn acquire(index_path: &Path) -> Result<IndexLock> {
        let mut name = index_path.as_os_str().to_owned();
        name.push(".lock");
        let path = PathBuf::from(name);
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        let file = File::options().create(true).truncate(false).write(true).open(&path).map_err(io_err(&path))?;
        match file.try_lock() {
            Ok(()) => Ok(IndexLock { _file: file }),
            Err(std::fs::TryLockError::WouldBlock) => Err(PipelineError::Locked(index_path.to_path_buf())),
            Err(std::fs::TryLockError::Error(e)) => Err(PipelineError::Io { path, source: e }),
        }
    }
}

/// Store, index and common-hash set loaded from an output directory.
pub struct Loaded {
    pub store: DocumentStore,
    pub index: PostingsIndex,
    pub commons: CommonHashSet,
}

impl Loaded {
    pub fn ctx(&self) -> ReuseContext<'_> {
        ReuseContext::new(&self.store, &self.index, &self.commons)
    }
}

pub fn load_store(cfg: &RunConfig) -> Result<DocumentStore> {
    let path = cfg.out_dir.join(DOCUMENTS_FILE);
    let reader = BufReader::new(open(&path)?);
    let mut store = DocumentStore::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(&path))?;
        let doc: Document = serde_json::from_str(&line).map_err(|e| PipelineError::BadLine {
            path: path.clone(),
            line: i + 1,
            message: e.to_string(),
        })?;
        store.insert(doc)?;
    }
    Ok(store)
}

fn save_store(cfg: &RunConfig, store: &DocumentStore) -> Result<()> {
    write_jsonl(&out_dir(cfg)?.join(DOCUMENTS_FILE), store.iter())
}

pub fn load(cfg: &RunConfig) -> Result<Loaded> {
    let store = load_store(cfg)?;
    let path = cfg.index_path();
    if !path.exists() {
        return Err(PipelineError::MissingInput(path));
    }
    let index = PostingsIndex::load(&path)?;
    if *index.config() != cfg.fingerprint() {
        return Err(PipelineError::Config(ConfigError::Invalid(format!(
            "index built with k={} t={} but config has k={} t={}",
            index.config().k,
            index.config().t,
            cfg.k,
            cfg.t
        ))));
    }
    let commons = index.compute_common_hashes(cfg.component_threshold);
    Ok(Loaded { store, index, commons })
}

/// Reads the corpus into `documents.jsonl` and writes a manifest of counts
/// and per-line failures.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<IngestReport> {
    cfg.validate()?;
    let corpus = cfg.corpus.as_ref().ok_or(PipelineError::NoCorpus)?;
    let reader = BufReader::new(open(corpus)?);
    let mut store = DocumentStore::default();
    let report = ingest_jsonl(reader, &cfg.ingest_options(), &mut store).map_err(io_err(corpus))?;
    save_store(cfg, &store)?;
    write_json(&cfg.out_dir.join(MANIFEST_FILE), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndexSummary {
    pub documents: usize,
    pub distinct_hashes: usize,
    pub postings: usize,
    pub common_hashes: usize,
}

/// Fingerprints every ingested document into a fresh index file.
pub fn cmd_index(cfg: &RunConfig) -> Result<IndexSummary> {
    cfg.validate()?;
    let store = load_store(cfg)?;
    let path = cfg.index_path();
    let _lock = IndexLock::acquire(&path)?;
    let fp_cfg = cfg.fingerprint();
    let docs: Vec<&Document> = store.iter().collect();
    let fps: Vec<_> = docs.par_iter().map(|d| fingerprint_document(d, &fp_cfg)).collect();
    let mut index = PostingsIndex::new(fp_cfg);
    for (doc, fp) in docs.iter().zip(&fps) {
        index.add_document(fp, doc, InsertMode::Insert)?;
    }
    index.save(&path)?;
    let summary = IndexSummary {
        documents: index.num_docs(),
        distinct_hashes: index.num_hashes(),
        postings: index.total_postings(),
        common_hashes: index.compute_common_hashes(cfg.component_threshold).len(),
    };
    write_json(&out_dir(cfg)?.join("index_summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanSummary {
    pub records: usize,
    pub flagged: usize,
    pub by_mode: Vec<(ReuseMode, usize)>,
}

/// All-pairs overlap records plus a flag decision for every document.
pub fn cmd_scan(cfg: &RunConfig) -> Result<ScanSummary> {
    let loaded = load(cfg)?;
    let ctx = loaded.ctx();
    let records = scan_overlaps(&ctx, cfg.min_shared)?;
    let decisions = flag_all(&ctx, &cfg.flag_policy())?;
    let dir = out_dir(cfg)?;
    write_jsonl(&dir.join("overlaps.jsonl"), &records)?;
    write_jsonl(&dir.join("flags.jsonl"), decisions.iter().filter(|d| d.flag.is_some()))?;
    let by_mode =
        ReuseMode::ALL.iter().map(|&m| (m, decisions.iter().filter(|d| d.flag == Some(m)).count())).collect();
    Ok(ScanSummary {
        records: records.len(),
        flagged: decisions.iter().filter(|d| d.flag.is_some()).count(),
        by_mode,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScreenSummary {
    pub screened: usize,
    pub flagged: usize,
    pub commons_refreshes: usize,
    pub errors: Vec<LineError>,
}

/// Screens a batch of new submissions against the index in submission
/// order, writing one admin note per flagged document, then persists the
/// grown store and index.
pub fn cmd_screen(cfg: &RunConfig, batch: &Path) -> Result<ScreenSummary> {
    let _lock = IndexLock::acquire(&cfg.index_path())?;
    let Loaded { mut store, mut index, mut commons } = load(cfg)?;
    let reader = BufReader::new(open(batch)?);
    let mut incoming = DocumentStore::default();
    let parsed = ingest_jsonl(reader, &cfg.ingest_options(), &mut incoming).map_err(io_err(batch))?;
    let docs: Vec<Document> = incoming.chronological().into_iter().cloned().collect();

    let report = screen_batch(
        docs,
        &mut ScreenState { store: &mut store, index: &mut index, commons: &mut commons },
        &cfg.flag_policy(),
        &cfg.screen_options(),
    )?;
    let dir = out_dir(cfg)?;
    write_jsonl(&dir.join("admin_notes.jsonl"), &report.notes)?;
    let text: String = report.notes.iter().map(|n| n.render_text() + "\n").collect();
    write_file(&dir.join("admin_notes.txt"), &text)?;
    let mut errors = parsed.errors;
    errors.extend(report.errors.iter().map(|f| LineError { line: 0, id: Some(f.id.clone()), error: f.error.clone() }));
    let summary = ScreenSummary {
        screened: report.screened,
        flagged: report.notes.len(),
        commons_refreshes: report.commons_refreshes,
        errors,
    };
    write_json(&dir.join("screen_report.json"), &summary)?;
    save_store(cfg, &store)?;
    index.save(cfg.index_path())?;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Report {
    /// Pairs per overlap size, by mode.
    Fig1,
    /// Share of articles by reuse fraction, with the review partition.
    Fig2,
    /// Authors by share of flagged articles, by mode.
    Fig4,
    /// Median citations against reuse fraction.
    Fig5,
    /// Citations of reused sources against the amount reused.
    #[value(name = "appendixE")]
    AppendixE,
    /// Per-country shares under each metric.
    Countries,
}

impl Report {
    pub const ALL: [Report; 6] =
        [Report::Fig1, Report::Fig2, Report::Fig4, Report::Fig5, Report::AppendixE, Report::Countries];

    pub fn name(self) -> &'static str {
        match self {
            Report::Fig1 => "fig1",
            Report::Fig2 => "fig2",
            Report::Fig4 => "fig4",
            Report::Fig5 => "fig5",
            Report::AppendixE => "appendixE",
            Report::Countries => "countries",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    /// Restricts the citation reports to these submitter countries.
    pub countries: Option<BTreeSet<String>>,
}

fn analysis_json(a: &CitationAnalysis, countries: &Option<BTreeSet<String>>) -> serde_json::Value {
    serde_json::json!({
        "n_points": a.points.len(),
        "countries": countries,
        "binned": a.binned,
        "raw": a.raw,
    })
}

/// CSV text with a header row.
fn csv_text<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 fields")
}

fn bins_csv(a: &CitationAnalysis) -> String {
    csv_text(
        ["bin", "lo", "hi", "center", "count", "q1", "median", "q3"],
        a.bins.iter().map(|b| {
            [
                b.index.to_string(),
                b.lo.to_string(),
                b.hi.to_string(),
                b.center.to_string(),
                b.count.to_string(),
                b.q1.to_string(),
                b.median.to_string(),
                b.q3.to_string(),
            ]
        }),
    )
}

fn scan_records(loaded: &Loaded, cfg: &RunConfig) -> Result<Vec<OverlapRecord>> {
    Ok(scan_overlaps(&loaded.ctx(), cfg.min_shared)?)
}

fn decisions(loaded: &Loaded, cfg: &RunConfig) -> Result<Vec<FlagDecision>> {
    Ok(flag_all(&loaded.ctx(), &cfg.flag_policy())?)
}

/// Writes one report and returns the files produced.
pub fn cmd_report(cfg: &RunConfig, report: Report, opts: &ReportOptions) -> Result<Vec<PathBuf>> {
    let loaded = load(cfg)?;
    write_report(cfg, &loaded, report, opts)
}

fn write_report(cfg: &RunConfig, loaded: &Loaded, report: Report, opts: &ReportOptions) -> Result<Vec<PathBuf>> {
    let dir = out_dir(cfg)?.to_path_buf();
    let ctx = loaded.ctx();
    let mut written = Vec::new();
    let mut emit = |name: &str, body: String| -> Result<()> {
        let path = dir.join(name);
        write_file(&path, &body)?;
        written.push(path);
        Ok(())
    };
    match report {
        Report::Fig1 => {
            let records = scan_records(loaded, cfg)?;
            let rows = ReuseMode::ALL.into_iter().flat_map(|mode| {
                cumulative_overlap_distribution(&records, mode, cfg.min_shared)
                    .into_iter()
                    .map(move |(x, n)| [mode.to_string(), x.to_string(), n.to_string()])
            });
            emit("fig1.csv", csv_text(["mode", "threshold", "pairs"], rows))?;
        }
        Report::Fig2 => {
            let fractions = reuse_fractions(&ctx, ReuseVariant::UncommonOnly)?;
            let parts = [("all", Partition::All), ("review", Partition::Review), ("nonreview", Partition::NonReview)];
            let rows = parts.into_iter().flat_map(|(name, p)| {
                reuse_fraction_distribution(&fractions, p)
                    .points
                    .into_iter()
                    .map(move |(x, share)| [name.to_string(), x.to_string(), share.to_string()])
            });
            emit("fig2.csv", csv_text(["partition", "fraction", "share"], rows))?;
        }
        Report::Fig4 => {
            let modes = qualifying_modes(&decisions(loaded, cfg)?);
            let profiles = author_profiles(&loaded.store, &modes, cfg.min_author_articles);
            let rows = ReuseMode::ALL.into_iter().flat_map(|mode| {
                author_flag_histogram(&profiles, mode, cfg.min_author_articles)
                    .points
                    .into_iter()
                    .map(move |(x, n)| [mode.to_string(), x.to_string(), n.to_string()])
            });
            emit("fig4.csv", csv_text(["mode", "fraction", "authors"], rows))?;
        }
        Report::Fig5 => {
            let mut filters = CitationFilter::standard(cfg.duplicate_cut, cfg.conversion_cut);
            if let Some(c) = &opts.countries {
                filters.push(CitationFilter::Countries(c.clone()));
            }
            let data = citation_dataset(&ctx, &filters)?;
            let a = citation_vs_reuse(&data, cfg.bin_count, &cfg.spearman_options())?;
            let rows = data.iter().map(|p| [p.doc_id.clone(), p.fraction.to_string(), p.citations.to_string()]);
            emit("fig5_points.csv", csv_text(["doc_id", "fraction", "citations"], rows))?;
            emit("fig5.csv", bins_csv(&a))?;
            emit("fig5.json", pretty(&analysis_json(&a, &opts.countries)))?;
        }
        Report::AppendixE => {
            let policy = cfg.flag_policy();
            let records: Vec<OverlapRecord> = scan_records(loaded, cfg)?
                .into_iter()
                .filter(|r| r.mode != ReuseMode::CommonAuthor && r.shared_uncommon >= policy.threshold(r.mode))
                .collect();
            let a = source_citation_vs_reuse(
                &records,
                &ctx,
                opts.countries.as_ref(),
                cfg.bin_count,
                &cfg.spearman_options(),
            )?;
            emit("appendixE.csv", bins_csv(&a))?;
            emit("appendixE.json", pretty(&analysis_json(&a, &opts.countries)))?;
        }
        Report::Countries => {
            let inputs = country_inputs(&ctx, &decisions(loaded, cfg)?)?;
            let metrics = [CountryMetric::FracAbove20, CountryMetric::FracAbove50, CountryMetric::LinkMeasure];
            let rows = metrics.into_iter().flat_map(|m| {
                country_metrics(&inputs, m, cfg.min_country_articles, cfg.min_country_authors).into_iter().map(
                    move |row| {
                        [
                            m.name().to_string(),
                            row.country,
                            row.flagged_share.to_string(),
                            row.n_articles.to_string(),
                            row.n_authors.to_string(),
                        ]
                    },
                )
            });
            emit("countries.csv", csv_text(["metric", "country", "flagged_share", "n_articles", "n_authors"], rows))?;
        }
    }
    Ok(written)
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("value serializes") + "\n"
}

/// Overlap network of `authors`, written as Graphviz and JSON.
pub fn cmd_export_network(cfg: &RunConfig, authors: &[String]) -> Result<OverlapNetwork> {
    let loaded = load(cfg)?;
    let records = scan_records(&loaded, cfg)?;
    let net = export_overlap_network(authors, &records, &loaded.store, &cfg.flag_policy())?;
    let dir = out_dir(cfg)?;
    write_file(&dir.join("network.dot"), &net.to_dot())?;
    write_file(&dir.join("network.json"), &(net.to_json() + "\n"))?;
    Ok(net)
}

/// Outcome of one report in [`run_all`]; reports that cannot be computed on
/// the corpus (too little data, say) are recorded rather than fatal.
#[derive(Debug, Clone, Serialize)]
pub struct ReportOutcome {
    pub report: &'static str,
    pub error: Option<String>,
}

/// Ingest, index, scan and every report in sequence.
pub fn run_all(cfg: &RunConfig, opts: &ReportOptions) -> Result<Vec<ReportOutcome>> {
    cmd_ingest(cfg)?;
    cmd_index(cfg)?;
    cmd_scan(cfg)?;
    let loaded = load(cfg)?;
    let mut outcomes = Vec::new();
    for r in Report::ALL {
        let error = match write_report(cfg, &loaded, r, opts) {
            Ok(_) => None,
            Err(PipelineError::Analytics(e)) => Some(e.to_string()),
            Err(e) => return Err(e),
        };
        outcomes.push(ReportOutcome { report: r.name(), error });
    }
    write_json(&cfg.out_dir.join("reports.json"), &outcomes)?;
    Ok(outcomes)
}
