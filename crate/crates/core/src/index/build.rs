// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, HashMap, HashSet};

use log::warn;
use serde::Serialize;

use super::{CorpusRecord, DocId, DocRef, FormulaId, Index, IndexError, IndexParams, Parts, Posting, TupleId};
use crate::slt::{parse_mathml, Slt};
use crate::tuples::{extract_tuples, Tuple, TupleBag, WildcardPattern};

/// Counters collected while ingesting a corpus.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestReport {
    pub records: usize,
    pub formulae: usize,
    pub parse_failures: usize,
    /// Corpus lines that could not be decoded at all.
    pub skipped_lines: usize,
    /// Repeated occurrences of a formula within one document.
    pub repeated_in_document: usize,
}

/// Single-writer accumulator for [`Index`] construction.
#[derive(Debug)]
pub struct IndexBuilder {
    params: IndexParams,
    formulas: Vec<String>,
    formula_lookup: HashMap<String, FormulaId>,
    bags: Vec<TupleBag>,
    documents: Vec<String>,
    document_lookup: HashMap<String, DocId>,
    occurrences: Vec<Vec<DocRef>>,
    seen: HashSet<(FormulaId, DocId)>,
    report: IngestReport,
}

impl IndexBuilder {
    pub fn new(params: IndexParams) -> Self {
        IndexBuilder {
            params,
            formulas: Vec::new(),
            formula_lookup: HashMap::new(),
            bags: Vec::new(),
            documents: Vec::new(),
            document_lookup: HashMap::new(),
            occurrences: Vec::new(),
            seen: HashSet::new(),
            report: IngestReport::default(),
        }
    }

    pub fn params(&self) -> IndexParams {
        self.params
    }

    pub fn report(&self) -> &IngestReport {
        &self.report
    }

    pub fn report_mut(&mut self) -> &mut IngestReport {
        &mut self.report
    }

    /// Parse and add every formula of a record. Formulae that fail to parse
    /// are logged and counted, not fatal.
    pub fn add_record(&mut self, record: &CorpusRecord) {
        self.report.records += 1;
        self.document(&record.doc);
        for f in &record.formulae {
            match parse_mathml(&f.mathml) {
                Ok(slt) => self.add_formula(&record.doc, f.pos, &slt),
                Err(e) => {
                    self.report.parse_failures += 1;
                    warn!("{}: formula at position {}: {e}", record.doc, f.pos);
                }
            }
        }
    }

    /// Record one occurrence of `slt` in `doc`. Only the first occurrence
    /// of a formula within a document is kept.
    pub fn add_formula(&mut self, doc: &str, position: u32, slt: &Slt) {
        self.report.formulae += 1;
        let doc = self.document(doc);
        let key = slt.canonical_string();
        let formula = match self.formula_lookup.get(&key) {
            Some(&id) => id,
            None => {
                let id = self.formulas.len() as FormulaId;
                self.bags
                    .push(extract_tuples(slt, self.params.window, self.params.eol));
                self.formula_lookup.insert(key.clone(), id);
                self.formulas.push(key);
                self.occurrences.push(Vec::new());
                id
            }
        };
        if self.seen.insert((formula, doc)) {
            self.occurrences[formula as usize].push(DocRef { doc, position });
        } else {
            self.report.repeated_in_document += 1;
        }
    }

    fn document(&mut self, name: &str) -> DocId {
        if let Some(&id) = self.document_lookup.get(name) {
            return id;
        }
        let id = self.documents.len() as DocId;
        self.documents.push(name.to_owned());
        self.document_lookup.insert(name.to_owned(), id);
        id
    }

    /// Finish with formula ids reordered by size quartiles.
    pub fn finish(self) -> Index {
        reorder_formula_ids(self.finish_unordered())
    }

    /// Finish keeping formula ids in first-seen order.
    pub fn finish_unordered(self) -> Index {
        let mut tuple_ids: BTreeMap<&Tuple, TupleId> = BTreeMap::new();
        for bag in &self.bags {
            for (t, _) in bag.iter() {
                tuple_ids.entry(t).or_insert(0);
            }
        }
        for (id, slot) in tuple_ids.values_mut().enumerate() {
            *slot = id as TupleId;
        }

        let mut postings = vec![Vec::new(); tuple_ids.len()];
        for (formula, bag) in self.bags.iter().enumerate() {
            for (t, count) in bag.iter() {
                postings[tuple_ids[t] as usize].push(Posting {
                    formula: formula as FormulaId,
                    count,
                });
            }
        }

        let mut expansions: BTreeMap<WildcardPattern, Vec<TupleId>> = BTreeMap::new();
        for (t, &id) in &tuple_ids {
            for pattern in WildcardPattern::generalizations(t) {
                expansions.entry(pattern).or_default().push(id);
            }
        }

        let sizes = self
            .bags
            .iter()
            .map(|b| u32::try_from(b.total()).expect("tuple count fits in u32"))
            .collect();
        let mut occurrences = self.occurrences;
        for occ in &mut occurrences {
            occ.sort();
        }
        let tuples = tuple_ids.into_keys().cloned().collect();
        let (patterns, expansions) = expansions.into_iter().unzip();
        let parts = Parts {
            formulas: self.formulas,
            documents: self.documents,
            tuples,
            patterns,
            postings,
            occurrences,
            expansions,
            sizes,
        };
        Index::from_parts(self.params, parts)
    }
}

/// Build an index from corpus records, reordering formula ids.
pub fn build_index(
    records: impl IntoIterator<Item = CorpusRecord>,
    params: IndexParams,
) -> Result<(Index, IngestReport), IndexError> {
    let mut builder = IndexBuilder::new(params);
    for record in records {
        builder.add_record(&record);
    }
    if builder.report.records == 0 {
        return Err(IndexError::EmptyCorpus);
    }
    let report = builder.report.clone();
    Ok((builder.finish(), report))
}

/// Old formula ids listed in their new order: sort by size, split into
/// quartiles `q1..q4` and concatenate `q2, reverse(q1), q3, q4`. Quartile
/// boundaries are `⌊i·n/4⌋`; equal sizes keep their relative id order.
pub fn quartile_order(sizes: &[u32]) -> Vec<FormulaId> {
    let n = sizes.len();
    let mut by_size: Vec<FormulaId> = (0..n as FormulaId).collect();
    by_size.sort_by_key(|&f| sizes[f as usize]);
    let (b1, b2, b3) = (n / 4, n / 2, 3 * n / 4);
    let mut order = Vec::with_capacity(n);
    order.extend_from_slice(&by_size[b1..b2]);
    order.extend(by_size[..b1].iter().rev());
    order.extend_from_slice(&by_size[b2..b3]);
    order.extend_from_slice(&by_size[b3..]);
    order
}

/// Renumber formula ids by [`quartile_order`], rewriting D1, A1, PL1 and PL2.
pub fn reorder_formula_ids(index: Index) -> Index {
    let (params, mut parts) = index.into_parts();
    let order = quartile_order(&parts.sizes);
    let mut new_id = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        new_id[old as usize] = new as FormulaId;
    }
    fn permute<T>(v: &mut Vec<T>, order: &[FormulaId]) {
        let mut taken: Vec<Option<T>> = std::mem::take(v).into_iter().map(Some).collect();
        *v = order
            .iter()
            .map(|&old| taken[old as usize].take().expect("permutation"))
            .collect();
    }
    permute(&mut parts.formulas, &order);
    permute(&mut parts.sizes, &order);
    permute(&mut parts.occurrences, &order);
    for list in &mut parts.postings {
        for p in list.iter_mut() {
            p.formula = new_id[p.formula as usize];
        }
        list.sort_by_key(|p| p.formula);
    }
    Index::from_parts(params, parts)
}
