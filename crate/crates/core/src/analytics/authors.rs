use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::curves::StepCurve;
use crate::classify::ReuseMode;
use crate::corpus::{DocKind, DocumentStore};

pub const DEFAULT_MIN_AUTHOR_ARTICLES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorProfile {
    pub author_key: String,
    pub article_ids: BTreeSet<String>,
    /// Share of `article_ids` carrying a qualifying pair of each mode.
    pub flagged_fraction: BTreeMap<ReuseMode, f64>,
}

/// Profiles of authors with at least `min_articles` normal articles.
///
/// Review-type and large-collaboration documents are left out of every
/// article set. `modes` maps a document id to the modes with at least one
/// qualifying pair; missing ids count as unflagged.
pub fn author_profiles(
    store: &DocumentStore,
    modes: &BTreeMap<String, BTreeSet<ReuseMode>>,
    min_articles: usize,
) -> Vec<AuthorProfile> {
    let mut out = Vec::new();
    for author in store.authors() {
        let article_ids: BTreeSet<String> = store
            .docs_by_author(author)
            .filter(|d| d.kind == DocKind::Normal)
            .map(|d| d.id.clone())
            .collect();
        if article_ids.is_empty() || article_ids.len() < min_articles {
            continue;
        }
        let n = article_ids.len() as f64;
        let flagged_fraction = ReuseMode::ALL
            .iter()
            .map(|&m| {
                let hits = article_ids.iter().filter(|id| modes.get(*id).is_some_and(|s| s.contains(&m))).count();
                (m, hits as f64 / n)
            })
            .collect();
        out.push(AuthorProfile { author_key: author.to_string(), article_ids, flagged_fraction });
    }
    out
}

/// Number of profiled authors whose `mode` fraction is at least `x`.
///
/// Profiles with fewer than `min_articles` articles are skipped, so the
/// histogram can be tightened after profiling.
pub fn author_flag_histogram(profiles: &[AuthorProfile], mode: ReuseMode, min_articles: usize) -> StepCurve {
    let vals: Vec<f64> = profiles
        .iter()
        .filter(|p| p.article_ids.len() >= min_articles)
        .map(|p| p.flagged_fraction.get(&mode).copied().unwrap_or(0.0))
        .collect();
    StepCurve::ccdf(&vals, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, Document};
    use chrono::NaiveDate;

    fn doc(id: &str, authors: &[&str], kind: DocKind) -> Document {
        Document {
            id: id.into(),
            title: None,
            authors: authors.iter().map(|a| a.to_string()).collect(),
            submit_date: NaiveDate::from_ymd_opt(2005, 1, 1).unwrap(),
            revised_date: None,
            comments: String::new(),
            submitter_country: "US".into(),
            cited_ids: Default::default(),
            collaboration: None,
            kind,
            tokens: tokenize("x"),
        }
    }

    fn store_with(author: &str, n: usize, prefix: &str, kind: DocKind, store: &mut DocumentStore) {
        for i in 0..n {
            store.insert(doc(&format!("{prefix}{i}"), &[author], kind)).unwrap();
        }
    }

    #[test]
    fn ten_articles_four_flagged() {
        let mut store = DocumentStore::default();
        store_with("ann", 10, "a", DocKind::Normal, &mut store);
        store_with("ann", 5, "r", DocKind::ReviewType, &mut store);
        store_with("bob", 3, "b", DocKind::Normal, &mut store);
        let mut modes = BTreeMap::new();
        for i in 0..4 {
            modes.insert(format!("a{i}"), BTreeSet::from([ReuseMode::CommonAuthor]));
        }
        for i in 0..5 {
            modes.insert(format!("r{i}"), BTreeSet::from([ReuseMode::CommonAuthor]));
        }
        let profiles = author_profiles(&store, &modes, DEFAULT_MIN_AUTHOR_ARTICLES);
        assert_eq!(profiles.len(), 1, "bob has only three articles");
        assert_eq!(profiles[0].article_ids.len(), 10, "review articles excluded");
        let h = author_flag_histogram(&profiles, ReuseMode::CommonAuthor, 4);
        for x in [0.0, 0.1, 0.25, 0.4] {
            assert_eq!(h.value_at(x), 1.0, "x = {x}");
        }
        assert_eq!(h.value_at(0.41), 0.0);
        let un = author_flag_histogram(&profiles, ReuseMode::Uncited, 4);
        assert_eq!(un.points, vec![(0.0, 1.0)]);
    }

    #[test]
    fn no_flags_gives_single_step() {
        let mut store = DocumentStore::default();
        for a in ["a", "b", "c"] {
            store_with(a, 4, a, DocKind::Normal, &mut store);
        }
        let profiles = author_profiles(&store, &BTreeMap::new(), 4);
        let h = author_flag_histogram(&profiles, ReuseMode::Cited, 4);
        assert_eq!(h.points, vec![(0.0, 3.0)]);
        assert_eq!(h.value_at(0.01), 0.0);
    }
}
