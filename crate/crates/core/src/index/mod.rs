// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

//! Immutable inverted index over symbol-pair tuples.
//!
//! | structure | maps                                   |
//! |-----------|----------------------------------------|
//! | D1        | canonical formula string → formula id  |
//! | D2        | document name → document id            |
//! | D3        | tuple → tuple id                       |
//! | D4        | single-wildcard pattern → pattern id   |
//! | PL1       | tuple id → `(formula id, count)*`      |
//! | PL2       | formula id → `(document id, position)*`|
//! | PL3       | pattern id → `tuple id*`               |
//! | A1        | formula id → total tuple count         |
//!
//! Tuple and pattern ids follow the sort order of [`Tuple`] and
//! [`WildcardPattern`], so PL3 expansions enumerate matching tuples in tuple
//! order. Formula ids are renumbered after ingestion (see
//! [`reorder_formula_ids`]) so that ids of similarly sized formulae cluster.

mod build;
mod corpus;
mod io;

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::tuples::{Tuple, WildcardPattern, Window};

pub use build::{build_index, quartile_order, reorder_formula_ids, IndexBuilder, IngestReport};
pub use corpus::{read_html_dir, CorpusRecord, FormulaRecord, JsonlRecords};
pub use io::{load, save, FORMAT_VERSION, MAGIC};

pub type FormulaId = u32;
pub type DocId = u32;
pub type TupleId = u32;
pub type PatternId = u32;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("corpus contains no records")]
    EmptyCorpus,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a tangent index, or unsupported format version")]
    FormatVersionMismatch,
    #[error("index checksum mismatch")]
    ChecksumMismatch,
    #[error("corrupt index: {0}")]
    Corrupt(String),
}

/// Tuple extraction parameters fixed at build time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IndexParams {
    pub window: Window,
    pub eol: bool,
}

impl IndexParams {
    pub fn new(window: Window, eol: bool) -> Self {
        IndexParams { window, eol }
    }
}

/// PL1 entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Posting {
    pub formula: FormulaId,
    pub count: u32,
}

/// PL2 entry: a document holding the formula and the ordinal of its first
/// occurrence there.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct DocRef {
    pub doc: DocId,
    pub position: u32,
}

#[derive(Clone, Debug)]
pub struct Index {
    params: IndexParams,
    formulas: Vec<String>,
    documents: Vec<String>,
    tuples: Vec<Tuple>,
    patterns: Vec<WildcardPattern>,
    postings: Vec<Vec<Posting>>,
    occurrences: Vec<Vec<DocRef>>,
    expansions: Vec<Vec<TupleId>>,
    sizes: Vec<u32>,

    formula_lookup: HashMap<String, FormulaId>,
    tuple_lookup: HashMap<Tuple, TupleId>,
    pattern_lookup: HashMap<WildcardPattern, PatternId>,
    /// Position of each formula in canonical-string order.
    canonical_rank: Vec<u32>,
}

/// Stored structures of an index, in id order.
#[derive(Clone, Debug, Default)]
pub(crate) struct Parts {
    pub formulas: Vec<String>,
    pub documents: Vec<String>,
    pub tuples: Vec<Tuple>,
    pub patterns: Vec<WildcardPattern>,
    pub postings: Vec<Vec<Posting>>,
    pub occurrences: Vec<Vec<DocRef>>,
    pub expansions: Vec<Vec<TupleId>>,
    pub sizes: Vec<u32>,
}

fn lookup<K: Clone + Eq + std::hash::Hash>(keys: &[K]) -> HashMap<K, u32> {
    keys.iter()
        .enumerate()
        .map(|(i, k)| (k.clone(), i as u32))
        .collect()
}

impl Index {
    pub(crate) fn from_parts(params: IndexParams, parts: Parts) -> Index {
        let mut by_string: Vec<u32> = (0..parts.formulas.len() as u32).collect();
        by_string.sort_by(|&a, &b| parts.formulas[a as usize].cmp(&parts.formulas[b as usize]));
        let mut canonical_rank = vec![0; by_string.len()];
        for (rank, &f) in by_string.iter().enumerate() {
            canonical_rank[f as usize] = rank as u32;
        }
        Index {
            params,
            formula_lookup: lookup(&parts.formulas),
            tuple_lookup: lookup(&parts.tuples),
            pattern_lookup: lookup(&parts.patterns),
            canonical_rank,
            formulas: parts.formulas,
            documents: parts.documents,
            tuples: parts.tuples,
            patterns: parts.patterns,
            postings: parts.postings,
            occurrences: parts.occurrences,
            expansions: parts.expansions,
            sizes: parts.sizes,
        }
    }

    pub(crate) fn into_parts(self) -> (IndexParams, Parts) {
        (
            self.params,
            Parts {
                formulas: self.formulas,
                documents: self.documents,
                tuples: self.tuples,
                patterns: self.patterns,
                postings: self.postings,
                occurrences: self.occurrences,
                expansions: self.expansions,
                sizes: self.sizes,
            },
        )
    }

    /// An index without formulae.
    pub fn empty(params: IndexParams) -> Index {
        Index::from_parts(params, Parts::default())
    }

    pub fn params(&self) -> IndexParams {
        self.params
    }

    pub fn formula_count(&self) -> usize {
        self.formulas.len()
    }

    pub fn document_count(&self) -> usize {
        self.documents.len()
    }

    pub fn tuple_count(&self) -> usize {
        self.tuples.len()
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns.len()
    }

    /// D1 key (canonical SLT string) of a formula.
    pub fn formula(&self, id: FormulaId) -> &str {
        &self.formulas[id as usize]
    }

    pub fn formula_id(&self, canonical: &str) -> Option<FormulaId> {
        self.formula_lookup.get(canonical).copied()
    }

    pub fn document(&self, id: DocId) -> &str {
        &self.documents[id as usize]
    }

    pub fn tuple(&self, id: TupleId) -> &Tuple {
        &self.tuples[id as usize]
    }

    pub fn tuple_id(&self, tuple: &Tuple) -> Option<TupleId> {
        self.tuple_lookup.get(tuple).copied()
    }

    pub fn pattern(&self, id: PatternId) -> &WildcardPattern {
        &self.patterns[id as usize]
    }

    pub fn pattern_id(&self, pattern: &WildcardPattern) -> Option<PatternId> {
        self.pattern_lookup.get(pattern).copied()
    }

    /// PL1 list, increasing in formula id.
    pub fn postings(&self, tuple: TupleId) -> &[Posting] {
        &self.postings[tuple as usize]
    }

    /// PL2 list, increasing in document id.
    pub fn occurrences(&self, formula: FormulaId) -> &[DocRef] {
        &self.occurrences[formula as usize]
    }

    /// PL3 list, increasing in tuple id.
    pub fn expansion(&self, pattern: PatternId) -> &[TupleId] {
        &self.expansions[pattern as usize]
    }

    /// A1: total number of tuples (with multiplicity) of a formula.
    pub fn size(&self, formula: FormulaId) -> u32 {
        self.sizes[formula as usize]
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    /// Rank of the formula's canonical string among all formulae; a
    /// tie-breaker that does not depend on id assignment.
    pub fn canonical_rank(&self, formula: FormulaId) -> u32 {
        self.canonical_rank[formula as usize]
    }

    /// Verify the structural invariants; returns the first violation found.
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.formulas.len();
        if self.sizes.len() != n || self.occurrences.len() != n {
            return Err("A1/PL2 length differs from D1".into());
        }
        if self.postings.len() != self.tuples.len() {
            return Err("PL1 length differs from D3".into());
        }
        if self.expansions.len() != self.patterns.len() {
            return Err("PL3 length differs from D4".into());
        }
        if self.formula_lookup.len() != n {
            return Err("duplicate formula in D1".into());
        }
        let mut totals = vec![0u64; n];
        for (tid, list) in self.postings.iter().enumerate() {
            if list.is_empty() {
                return Err(format!("tuple {tid} has an empty postings list"));
            }
            for pair in list.windows(2) {
                if pair[0].formula >= pair[1].formula {
                    return Err(format!("PL1[{tid}] not strictly increasing"));
                }
            }
            for p in list {
                let slot = totals
                    .get_mut(p.formula as usize)
                    .ok_or_else(|| format!("PL1[{tid}] references unknown formula {}", p.formula))?;
                if p.count == 0 {
                    return Err(format!("PL1[{tid}] has a zero count"));
                }
                *slot += u64::from(p.count);
            }
        }
        for (f, total) in totals.iter().enumerate() {
            if *total != u64::from(self.sizes[f]) {
                return Err(format!("A1[{f}] = {} but PL1 counts sum to {total}", self.sizes[f]));
            }
            let occ = &self.occurrences[f];
            if occ.is_empty() {
                return Err(format!("formula {f} has no document"));
            }
            if occ.iter().any(|r| r.doc as usize >= self.documents.len()) {
                return Err(format!("PL2[{f}] references an unknown document"));
            }
            if occ.windows(2).any(|w| w[0].doc >= w[1].doc) {
                return Err(format!("PL2[{f}] not strictly increasing in document"));
            }
        }
        for (pid, list) in self.expansions.iter().enumerate() {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("PL3[{pid}] not strictly increasing"));
            }
            let pattern = &self.patterns[pid];
            for &t in list {
                let tuple = self
                    .tuples
                    .get(t as usize)
                    .ok_or_else(|| format!("PL3[{pid}] references unknown tuple {t}"))?;
                if !pattern.matches(tuple) {
                    return Err(format!("PL3[{pid}] lists non-matching tuple {t}"));
                }
            }
        }
        let covered: usize = self.expansions.iter().map(Vec::len).sum();
        if covered != 2 * self.tuples.len() {
            return Err("D4/PL3 do not cover both generalizations of every tuple".into());
        }
        if self.tuples.windows(2).any(|w| w[0] >= w[1]) {
            return Err("D3 not in tuple order".into());
        }
        if self.patterns.windows(2).any(|w| w[0] >= w[1]) {
            return Err("D4 not in pattern order".into());
        }
        Ok(())
    }
}

impl PartialEq for Index {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
            && self.formulas == other.formulas
            && self.documents == other.documents
            && self.tuples == other.tuples
            && self.patterns == other.patterns
            && self.postings == other.postings
            && self.occurrences == other.occurrences
            && self.expansions == other.expansions
            && self.sizes == other.sizes
    }
}

impl Eq for Index {}
