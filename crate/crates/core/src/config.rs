//! Run configuration: defaults, a TOML file, and command-line overrides,
//! applied in that order.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytics::{SpearmanOptions, DEFAULT_BIN_COUNT, DEFAULT_MIN_AUTHOR_ARTICLES, DEFAULT_MIN_COUNTRY_ARTICLES};
use crate::classify::{FlagPolicy, ScreenOptions};
use crate::corpus::{IngestOptions, DEFAULT_COLLABORATION_THRESHOLD};
use crate::fingerprint::{FingerprintConfig, DEFAULT_K, DEFAULT_T};
use crate::index::DEFAULT_COMPONENT_THRESHOLD;

/// Overrides the output directory when no flag is given.
pub const OUT_DIR_ENV: &str = "TEXTREUSE_OUT";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub k: usize,
    pub t: usize,
    pub exclude_quotes: bool,
    pub component_threshold: usize,
    pub au_threshold: usize,
    pub ci_threshold: usize,
    pub un_threshold: usize,
    pub review_excluded: bool,
    pub duplicate_cut: f64,
    pub conversion_cut: f64,
    pub collaboration_threshold: usize,
    pub strip_references: bool,
    /// Smallest shared count written by `scan`.
    pub min_shared: usize,
    pub min_author_articles: usize,
    pub min_country_articles: usize,
    pub min_country_authors: usize,
    pub bin_count: usize,
    pub commons_refresh_every: usize,
    pub permutations: usize,
    pub seed: u64,
    pub corpus: Option<PathBuf>,
    /// Defaults to `index.bin` inside `out_dir`.
    pub index: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let policy = FlagPolicy::default();
        RunConfig {
            k: DEFAULT_K,
            t: DEFAULT_T,
            exclude_quotes: true,
            component_threshold: DEFAULT_COMPONENT_THRESHOLD,
            au_threshold: policy.au_threshold,
            ci_threshold: policy.ci_threshold,
            un_threshold: policy.un_threshold,
            review_excluded: policy.review_excluded,
            duplicate_cut: policy.duplicate_cut,
            conversion_cut: policy.conversion_cut,
            collaboration_threshold: DEFAULT_COLLABORATION_THRESHOLD,
            strip_references: true,
            min_shared: 10,
            min_author_articles: DEFAULT_MIN_AUTHOR_ARTICLES,
            min_country_articles: DEFAULT_MIN_COUNTRY_ARTICLES,
            min_country_authors: 0,
            bin_count: DEFAULT_BIN_COUNT,
            commons_refresh_every: ScreenOptions::default().commons_refresh_every,
            permutations: SpearmanOptions::default().permutations,
            seed: SpearmanOptions::default().seed,
            corpus: None,
            index: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let s = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        self.fingerprint().validate().map_err(|e| invalid(&e))?;
        self.flag_policy().validate().map_err(|e| invalid(&e))?;
        if self.component_threshold < 2 {
            return Err(ConfigError::Invalid("component_threshold must be at least 2".into()));
        }
        if self.bin_count == 0 {
            return Err(ConfigError::Invalid("bin_count must be positive".into()));
        }
        if self.commons_refresh_every == 0 {
            return Err(ConfigError::Invalid("commons_refresh_every must be positive".into()));
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> FingerprintConfig {
        FingerprintConfig { k: self.k, t: self.t, exclude_quotes: self.exclude_quotes }
    }

    pub fn flag_policy(&self) -> FlagPolicy {
        FlagPolicy {
            au_threshold: self.au_threshold,
            ci_threshold: self.ci_threshold,
            un_threshold: self.un_threshold,
            review_excluded: self.review_excluded,
            duplicate_cut: self.duplicate_cut,
            conversion_cut: self.conversion_cut,
        }
    }

    pub fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            collaboration_threshold: self.collaboration_threshold,
            strip_references: self.strip_references,
        }
    }

    pub fn screen_options(&self) -> ScreenOptions {
        ScreenOptions {
            component_threshold: self.component_threshold,
            commons_refresh_every: self.commons_refresh_every,
            replace_existing: false,
        }
    }

    pub fn spearman_options(&self) -> SpearmanOptions {
        SpearmanOptions { permutations: self.permutations, seed: self.seed }
    }

    pub fn index_path(&self) -> PathBuf {
        self.index.clone().unwrap_or_else(|| self.out_dir.join("index.bin"))
    }
}

/// Command-line overrides, one optional flag per config field.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ConfigOverrides {
    /// TOML config file; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Tokens per gram.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Guaranteed match length in tokens.
    #[arg(long, global = true)]
    pub t: Option<usize>,
    /// Skip grams inside quotation marks.
    #[arg(long, global = true)]
    pub exclude_quotes: Option<bool>,
    /// Coauthor components that make a hash common.
    #[arg(long, global = true)]
    pub component_threshold: Option<usize>,
    /// Shared grams to flag a common-author pair.
    #[arg(long, global = true)]
    pub au_threshold: Option<usize>,
    /// Shared grams to flag a cited pair.
    #[arg(long, global = true)]
    pub ci_threshold: Option<usize>,
    /// Shared grams to flag an uncited pair.
    #[arg(long, global = true)]
    pub un_threshold: Option<usize>,
    /// Never flag review-type articles for common-author reuse.
    #[arg(long, global = true)]
    pub review_excluded: Option<bool>,
    /// Overlap ratio treated as a duplicate.
    #[arg(long, global = true)]
    pub duplicate_cut: Option<f64>,
    /// Reuse fraction below which citation analyses drop an article.
    #[arg(long, global = true)]
    pub conversion_cut: Option<f64>,
    /// Author count marking a large collaboration.
    #[arg(long, global = true)]
    pub collaboration_threshold: Option<usize>,
    /// Drop the trailing reference section before tokenizing.
    #[arg(long, global = true)]
    pub strip_references: Option<bool>,
    /// Smallest shared count kept by scan.
    #[arg(long, global = true)]
    pub min_shared: Option<usize>,
    /// Articles an author needs to be profiled.
    #[arg(long, global = true)]
    pub min_author_articles: Option<usize>,
    /// Articles a country needs to be reported.
    #[arg(long, global = true)]
    pub min_country_articles: Option<usize>,
    /// Distinct authors a country needs to be reported.
    #[arg(long, global = true)]
    pub min_country_authors: Option<usize>,
    /// Bins for the citation reports.
    #[arg(long, global = true)]
    pub bin_count: Option<usize>,
    /// Screened documents between common-hash refreshes.
    #[arg(long, global = true)]
    pub commons_refresh_every: Option<usize>,
    /// Shuffles for small-sample p-values.
    #[arg(long, global = true)]
    pub permutations: Option<usize>,
    /// Seed for permutation tests.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Corpus JSONL.
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Index file (default: index.bin in the output directory).
    #[arg(long, global = true)]
    pub index: Option<PathBuf>,
    /// Output directory; falls back to the TEXTREUSE_OUT environment variable.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
}

impl ConfigOverrides {
    /// Defaults, then the config file if given, then every set flag.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        self.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = &self.$f {
                    cfg.$f = v.clone();
                }
            )*};
        }
        set!(
            k, t, exclude_quotes, component_threshold, au_threshold, ci_threshold, un_threshold,
            review_excluded, duplicate_cut, conversion_cut, collaboration_threshold, strip_references,
            min_shared, min_author_articles, min_country_articles, min_country_authors, bin_count,
            commons_refresh_every, permutations, seed, out_dir
        );
        if self.corpus.is_some() {
            cfg.corpus = self.corpus.clone();
        }
        if self.index.is_some() {
            cfg.index = self.index.clone();
        }
    }
}
