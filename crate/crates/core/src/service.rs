// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

//! The query pipeline: parse, first-stage search, re-rank, group, rank
//! documents.

use std::collections::HashMap;
use std::time::Instant;

use serde::Serialize;

use crate::engine::{plan_query, search, DiceScore, SearchError, SearchOptions};
use crate::index::{FormulaId, Index};
use crate::mss::{mss, MssResult, ScoreTriple};
use crate::slt::{parse_mathml, ParseError, Slt, SltBuilder, SymbolLabel};
use crate::tuples::{extract_tuples, Window};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("query does not parse: {0}")]
    Parse(#[from] ParseError),
    #[error("no index loaded")]
    IndexNotLoaded,
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// How a candidate node relates to the matched query nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HighlightClass {
    Exact,
    Unified,
    Unmatched,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DocPosition {
    pub doc: String,
    pub position: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FormulaHit {
    pub form_id: FormulaId,
    pub canonical: String,
    /// `None` without re-ranking.
    pub triple: Option<ScoreTriple>,
    pub dice_score: f64,
    /// One class per candidate node in canonical pre-order; `None` without
    /// re-ranking.
    pub highlight: Option<Vec<HighlightClass>>,
    pub docs: Vec<DocPosition>,
    #[serde(skip)]
    dice: DiceScore,
    #[serde(skip)]
    canonical_rank: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResultGroup {
    pub structure_key: String,
    pub hits: Vec<FormulaHit>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DocumentHit {
    pub doc_name: String,
    pub best_triple: Option<ScoreTriple>,
    pub best_dice: f64,
    pub hit_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Timing {
    pub core_ms: f64,
    pub rerank_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchResponse {
    /// Canonical string of the query SLT.
    pub query: String,
    pub timing_ms: Timing,
    pub groups: Vec<ResultGroup>,
    pub documents: Vec<DocumentHit>,
}

impl SearchResponse {
    /// All hits in rank order.
    pub fn hits(&self) -> impl Iterator<Item = &FormulaHit> {
        let mut all: Vec<&FormulaHit> = self.groups.iter().flat_map(|g| &g.hits).collect();
        all.sort_by(|a, b| hit_order(a, b));
        all.into_iter()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Health {
    pub status: &'static str,
    pub formulae: usize,
    /// Window size, or `"all"`.
    pub w: serde_json::Value,
    pub eol: bool,
}

fn window_json(w: Window) -> serde_json::Value {
    match w.limit() {
        Some(n) => n.into(),
        None => "all".into(),
    }
}

/// Query front end over one immutable index.
#[derive(Debug, Default)]
pub struct SearchService {
    index: Option<Index>,
    options: SearchOptions,
}

impl SearchService {
    pub fn new(index: Index) -> Self {
        SearchService {
            index: Some(index),
            options: SearchOptions::default(),
        }
    }

    /// A service that answers every query with [`ServiceError::IndexNotLoaded`].
    pub fn without_index() -> Self {
        SearchService::default()
    }

    pub fn with_options(mut self, options: SearchOptions) -> Self {
        self.options = options;
        self
    }

    pub fn index(&self) -> Option<&Index> {
        self.index.as_ref()
    }

    pub fn health(&self) -> Result<Health, ServiceError> {
        let index = self.index.as_ref().ok_or(ServiceError::IndexNotLoaded)?;
        Ok(Health {
            status: "ok",
            formulae: index.formula_count(),
            w: window_json(index.params().window),
            eol: index.params().eol,
        })
    }

    /// Parse `mathml`, retrieve the top `k` formulae by Dice and, with
    /// `rerank`, re-score and re-sort them by Maximum Subtree Similarity.
    pub fn run_query(&self, mathml: &str, k: usize, rerank: bool) -> Result<SearchResponse, ServiceError> {
        if self.index.is_none() {
            return Err(ServiceError::IndexNotLoaded);
        }
        let query = parse_mathml(mathml)?;
        self.run_slt(&query, k, rerank)
    }

    /// [`SearchService::run_query`] for an already parsed query.
    pub fn run_slt(&self, query: &Slt, k: usize, rerank: bool) -> Result<SearchResponse, ServiceError> {
        let index = self.index.as_ref().ok_or(ServiceError::IndexNotLoaded)?;
        let params = index.params();
        let started = Instant::now();
        let plan = plan_query(index, &extract_tuples(query, params.window, params.eol));
        let candidates = search(index, &plan, k, self.options)?;
        let core_ms = ms_since(started);

        let started = Instant::now();
        let mut scored: Vec<(FormulaHit, String)> = candidates
            .into_iter()
            .map(|c| {
                let canonical = index.formula(c.formula).to_owned();
                let result = rerank.then(|| {
                    let slt = Slt::from_canonical(&canonical).expect("index holds canonical strings");
                    let result = mss(query, &slt);
                    let key = structure_key(query, &slt, &result);
                    (highlight(query, &slt, &result), key, result)
                });
                let (highlight, key, result) = match result {
                    Some((h, k, r)) => (Some(h), k, Some(r)),
                    None => (None, String::new(), None),
                };
                let hit = FormulaHit {
                    form_id: c.formula,
                    triple: result.as_ref().map(|r| r.triple),
                    dice_score: c.score.value(),
                    highlight,
                    docs: c
                        .doc_refs
                        .iter()
                        .map(|r| DocPosition {
                            doc: index.document(r.doc).to_owned(),
                            position: r.position,
                        })
                        .collect(),
                    canonical,
                    dice: c.score,
                    canonical_rank: index.canonical_rank(c.formula),
                };
                (hit, key)
            })
            .collect();
        scored.sort_by(|a, b| hit_order(&a.0, &b.0));
        let rerank_ms = if rerank { ms_since(started) } else { 0.0 };

        let mut groups: Vec<ResultGroup> = Vec::new();
        let mut group_of: HashMap<String, usize> = HashMap::new();
        for (hit, key) in scored {
            let slot = *group_of.entry(key.clone()).or_insert_with(|| {
                groups.push(ResultGroup {
                    structure_key: key,
                    hits: Vec::new(),
                });
                groups.len() - 1
            });
            groups[slot].hits.push(hit);
        }
        let all: Vec<&FormulaHit> = groups.iter().flat_map(|g| &g.hits).collect();
        let documents = rank_documents(all.iter().copied());
        Ok(SearchResponse {
            query: query.canonical_string(),
            timing_ms: Timing { core_ms, rerank_ms },
            groups,
            documents,
        })
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

/// Rank order: triple, then Dice, then canonical string (stable under
/// formula id renumbering).
fn hit_order(a: &FormulaHit, b: &FormulaHit) -> std::cmp::Ordering {
    b.triple
        .cmp(&a.triple)
        .then(b.dice.cmp(&a.dice))
        .then(a.canonical_rank.cmp(&b.canonical_rank))
}

/// Class of every candidate node under the best matched set.
pub fn highlight(query: &Slt, candidate: &Slt, result: &MssResult) -> Vec<HighlightClass> {
    let mut classes = vec![HighlightClass::Unmatched; candidate.len()];
    for &n in &result.matched.nodes {
        if let Some(c) = result.alignment.image(n) {
            classes[c] = if query.label(n) == candidate.label(c) {
                HighlightClass::Exact
            } else {
                HighlightClass::Unified
            };
        }
    }
    classes
}

/// Canonical string of the aligned query subtree with every label prefixed
/// by `=` (exact match), `~` (unified) or `-` (not in the matched set).
/// Empty when nothing aligned.
pub fn structure_key(query: &Slt, candidate: &Slt, result: &MssResult) -> String {
    let Some((root, _)) = result.alignment.root() else {
        return String::new();
    };
    let flagged = |n: usize| {
        let flag = match result.alignment.image(n) {
            _ if !result.matched.contains(n) => '-',
            Some(c) if query.label(n) == candidate.label(c) => '=',
            _ => '~',
        };
        SymbolLabel::new(format!("{flag}{}", query.label(n)))
    };
    let mut builder = SltBuilder::new(flagged(root)).expect("flagged labels are never reserved");
    let mut ids = HashMap::from([(root, builder.root())]);
    for n in result.alignment.query_nodes().skip(1) {
        let (parent, edge) = query.parent(n).expect("non-root aligned node has a parent");
        let id = builder
            .add_child(ids[&parent], edge, flagged(n))
            .expect("aligned nodes form a tree");
        ids.insert(n, id);
    }
    builder.finish().canonical_string()
}

/// Documents of `hits`, best first: by best triple (best Dice when hits
/// carry no triple), then number of hits, then name.
pub fn rank_documents<'a>(hits: impl IntoIterator<Item = &'a FormulaHit>) -> Vec<DocumentHit> {
    let mut by_doc: HashMap<&str, DocumentHit> = HashMap::new();
    let mut best_dice: HashMap<&str, DiceScore> = HashMap::new();
    for hit in hits {
        for d in &hit.docs {
            let entry = by_doc.entry(&d.doc).or_insert_with(|| DocumentHit {
                doc_name: d.doc.clone(),
                best_triple: None,
                best_dice: 0.0,
                hit_count: 0,
            });
            entry.hit_count += 1;
            entry.best_triple = entry.best_triple.max(hit.triple);
            let dice = best_dice.entry(&d.doc).or_insert(hit.dice);
            if hit.dice > *dice {
                *dice = hit.dice;
            }
            entry.best_dice = dice.value();
        }
    }
    let mut docs: Vec<(DiceScore, DocumentHit)> = by_doc
        .into_iter()
        .map(|(name, d)| (best_dice[name], d))
        .collect();
    docs.sort_by(|(da, a), (db, b)| {
        b.best_triple
            .cmp(&a.best_triple)
            .then_with(|| if a.best_triple.is_none() { db.cmp(da) } else { std::cmp::Ordering::Equal })
            .then(b.hit_count.cmp(&a.hit_count))
            .then_with(|| a.doc_name.cmp(&b.doc_name))
    });
    docs.into_iter().map(|(_, d)| d).collect()
}
