use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::classify::{FlagPolicy, OverlapRecord, ReuseMode};
use crate::corpus::DocumentStore;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkNode {
    pub id: String,
    pub submit_date: NaiveDate,
    /// Coauthored by a focal author.
    pub owned: bool,
    /// Position in submission order, from 0.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkEdge {
    /// Earlier document.
    pub from: String,
    /// Later document.
    pub to: String,
    pub mode: ReuseMode,
    /// Shared uncommon grams.
    pub weight: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapNetwork {
    pub focal_authors: Vec<String>,
    /// In submission order.
    pub nodes: Vec<NetworkNode>,
    /// Sorted by `(from, to)`.
    pub edges: Vec<NetworkEdge>,
}

fn color(mode: ReuseMode) -> &'static str {
    match mode {
        ReuseMode::CommonAuthor => "blue",
        ReuseMode::Cited => "green",
        ReuseMode::Uncited => "red",
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Documents of `focal_authors` plus every counterparty reached by a record
/// at or above its mode's flag threshold.
pub fn export_overlap_network(
    focal_authors: &[String],
    records: &[OverlapRecord],
    store: &DocumentStore,
    policy: &FlagPolicy,
) -> Result<OverlapNetwork, AnalyticsError> {
    let mut owned: BTreeSet<&str> = BTreeSet::new();
    let mut focal: Vec<String> = Vec::new();
    for raw in focal_authors {
        let key = crate::corpus::normalize_author(raw);
        let mut any = false;
        for d in store.docs_by_author(&key) {
            owned.insert(d.id.as_str());
            any = true;
        }
        if !any {
            return Err(AnalyticsError::UnknownAuthor(raw.clone()));
        }
        focal.push(key);
    }
    focal.sort();
    focal.dedup();

    let mut edges: Vec<NetworkEdge> = records
        .iter()
        .filter(|r| r.shared_uncommon >= policy.threshold(r.mode))
        .filter(|r| owned.contains(r.earlier_id.as_str()) || owned.contains(r.later_id.as_str()))
        .map(|r| NetworkEdge {
            from: r.earlier_id.clone(),
            to: r.later_id.clone(),
            mode: r.mode,
            weight: r.shared_uncommon,
        })
        .collect();
    edges.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
    edges.dedup_by(|b, a| a.from == b.from && a.to == b.to);

    let mut ids: BTreeSet<&str> = owned.clone();
    for e in &edges {
        ids.insert(&e.from);
        ids.insert(&e.to);
    }
    let mut docs = Vec::with_capacity(ids.len());
    for id in ids {
        let d = store
            .get(id)
            .ok_or_else(|| crate::classify::ClassifyError::UnknownDoc(id.to_string()))?;
        docs.push(d);
    }
    docs.sort_by(|a, b| a.chrono_key().cmp(&b.chrono_key()));
    let nodes = docs
        .iter()
        .enumerate()
        .map(|(rank, d)| NetworkNode {
            id: d.id.clone(),
            submit_date: d.submit_date,
            owned: owned.contains(d.id.as_str()),
            rank,
        })
        .collect();
    Ok(OverlapNetwork { focal_authors: focal, nodes, edges })
}

impl OverlapNetwork {
    /// Edges per focal-author document.
    pub fn edge_density(&self) -> f64 {
        let owned = self.nodes.iter().filter(|n| n.owned).count();
        if owned == 0 {
            0.0
        } else {
            self.edges.len() as f64 / owned as f64
        }
    }

    /// Graphviz description. Earlier documents sit lower; focal documents are
    /// white, others gray. Pen width is proportional to the edge weight.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph overlap {\n  rankdir=BT;\n  node [shape=box, style=filled];\n");
        let mut by_date: BTreeMap<NaiveDate, Vec<&NetworkNode>> = BTreeMap::new();
        for n in &self.nodes {
            let fill = if n.owned { "white" } else { "gray" };
            let label = format!("{}\\n{}", n.id.replace('\\', "\\\\").replace('"', "\\\""), n.submit_date);
            let _ = writeln!(out, "  {} [label=\"{label}\", fillcolor={fill}];", quote(&n.id));
            by_date.entry(n.submit_date).or_default().push(n);
        }
        for group in by_date.values().filter(|g| g.len() > 1) {
            let ids: Vec<String> = group.iter().map(|n| quote(&n.id)).collect();
            let _ = writeln!(out, "  {{ rank=same; {}; }}", ids.join("; "));
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  {} -> {} [color={}, penwidth={:.2}, weight={}, label=\"{} {}\"];",
                quote(&e.from),
                quote(&e.to),
                color(e.mode),
                e.weight as f64 / 50.0,
                e.weight,
                e.mode.code(),
                e.weight
            );
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json(s: &str) -> Result<OverlapNetwork, AnalyticsError> {
        serde_json::from_str(s).map_err(|e| AnalyticsError::Format(e.to_string()))
    }
}
