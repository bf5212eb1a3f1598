// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

//! First-stage retrieval: top-k formulae by Dice's coefficient over tuple
//! bags, evaluated document-at-a-time over merged postings cursors.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::index::{DocRef, FormulaId, Index, PatternId, Posting, TupleId};
use crate::tuples::{classify_query_tuple, QueryTupleClass, Tuple, TupleBag, WildcardPattern};

/// Number of results returned when the caller does not say.
pub const DEFAULT_K: usize = 100;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("k must be at least 1")]
    ZeroK,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcreteTerm {
    pub tuple: Tuple,
    /// `None` when the tuple does not occur in the index.
    pub id: Option<TupleId>,
    pub count: u32,
}

/// All single-wildcard query tuples sharing one pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WildcardTerm {
    pub pattern: WildcardPattern,
    pub id: Option<PatternId>,
    pub count: u32,
    /// Matching index tuples, increasing.
    pub expansion: Vec<TupleId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryPlan {
    pub concrete: Vec<ConcreteTerm>,
    /// In pattern order; this is also the order wildcards claim candidate tuples.
    pub wildcard: Vec<WildcardTerm>,
    /// Tuples with a wildcard at both ends. They take no part in scoring.
    pub ignored: Vec<(Tuple, u32)>,
    pub query_size: u64,
}

impl QueryPlan {
    pub fn wildcard_size(&self) -> u64 {
        self.wildcard.iter().map(|w| u64::from(w.count)).sum()
    }
}

/// Map a query bag (extracted with the index's parameters) onto index ids.
pub fn plan_query(index: &Index, query: &TupleBag) -> QueryPlan {
    let mut concrete = Vec::new();
    let mut wildcard: Vec<WildcardTerm> = Vec::new();
    let mut ignored = Vec::new();
    for (tuple, count) in query.iter() {
        match classify_query_tuple(tuple) {
            QueryTupleClass::Concrete => concrete.push(ConcreteTerm {
                tuple: tuple.clone(),
                id: index.tuple_id(tuple),
                count,
            }),
            QueryTupleClass::SingleWildcard(_) => {
                let pattern = WildcardPattern::from_query_tuple(tuple).expect("single wildcard");
                match wildcard.iter_mut().find(|w| w.pattern == pattern) {
                    Some(term) => term.count += count,
                    None => {
                        let id = index.pattern_id(&pattern);
                        let expansion = id.map(|p| index.expansion(p).to_vec()).unwrap_or_default();
                        wildcard.push(WildcardTerm {
                            pattern,
                            id,
                            count,
                            expansion,
                        });
                    }
                }
            }
            QueryTupleClass::MultiWildcard => ignored.push((tuple.clone(), count)),
        }
    }
    wildcard.sort_by(|a, b| a.pattern.cmp(&b.pattern));
    let query_size = concrete.iter().map(|c| u64::from(c.count)).sum::<u64>()
        + wildcard.iter().map(|w| u64::from(w.count)).sum::<u64>();
    QueryPlan {
        concrete,
        wildcard,
        ignored,
        query_size,
    }
}

/// Dice's coefficient `2·matched / (query size + candidate size)`, kept as a
/// fraction so comparisons are exact.
#[derive(Clone, Copy, Debug)]
pub struct DiceScore {
    pub matched: u64,
    pub total: u64,
}

impl DiceScore {
    pub fn new(matched: u64, total: u64) -> DiceScore {
        assert!(total > 0, "Dice denominator must be positive");
        DiceScore { matched, total }
    }

    pub fn value(self) -> f64 {
        2.0 * self.matched as f64 / self.total as f64
    }
}

impl PartialEq for DiceScore {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for DiceScore {}

impl Ord for DiceScore {
    fn cmp(&self, other: &Self) -> Ordering {
        (u128::from(self.matched) * u128::from(other.total))
            .cmp(&(u128::from(other.matched) * u128::from(self.total)))
    }
}

impl PartialOrd for DiceScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DiceScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4}", self.value())
    }
}

impl Serialize for DiceScore {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateHit {
    pub formula: FormulaId,
    pub matched: u64,
    pub score: DiceScore,
    pub doc_refs: Vec<DocRef>,
}

/// The optimizations of the search loop. None of them changes results.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Optimization {
    /// Galloping search when a cursor skips ahead.
    Galloping,
    /// Skip candidates whose size alone keeps them below the k-th score.
    SizeThreshold,
    /// Skip candidates matching only wildcard tuples once they cannot win,
    /// and stop enumerating them altogether when no such candidate can.
    SkipWildcardOnly,
    /// Stop reading a wildcard's expansion once its query count is used up.
    WildcardEarlyStop,
    /// Evaluate concrete cursors with longer postings lists first.
    LongPostingsFirst,
}

impl Optimization {
    pub const ALL: [Optimization; 5] = [
        Optimization::Galloping,
        Optimization::SizeThreshold,
        Optimization::SkipWildcardOnly,
        Optimization::WildcardEarlyStop,
        Optimization::LongPostingsFirst,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SearchOptions {
    pub galloping: bool,
    pub size_threshold: bool,
    pub skip_wildcard_only: bool,
    pub wildcard_early_stop: bool,
    pub long_postings_first: bool,
}

impl SearchOptions {
    pub fn all() -> Self {
        SearchOptions {
            galloping: true,
            size_threshold: true,
            skip_wildcard_only: true,
            wildcard_early_stop: true,
            long_postings_first: true,
        }
    }

    pub fn none() -> Self {
        SearchOptions {
            galloping: false,
            size_threshold: false,
            skip_wildcard_only: false,
            wildcard_early_stop: false,
            long_postings_first: false,
        }
    }

    pub fn with(mut self, opt: Optimization, on: bool) -> Self {
        *match opt {
            Optimization::Galloping => &mut self.galloping,
            Optimization::SizeThreshold => &mut self.size_threshold,
            Optimization::SkipWildcardOnly => &mut self.skip_wildcard_only,
            Optimization::WildcardEarlyStop => &mut self.wildcard_early_stop,
            Optimization::LongPostingsFirst => &mut self.long_postings_first,
        } = on;
        self
    }
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions::all()
    }
}

struct Cursor<'a> {
    list: &'a [Posting],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(list: &'a [Posting]) -> Self {
        Cursor { list, pos: 0 }
    }

    fn current(&self) -> Option<FormulaId> {
        self.list.get(self.pos).map(|p| p.formula)
    }

    fn count(&self) -> u32 {
        self.list[self.pos].count
    }

    /// Move to the first posting with formula id `>= target`.
    fn seek(&mut self, target: FormulaId, galloping: bool) {
        let rest = &self.list[self.pos..];
        if !galloping {
            let skip = rest.iter().take_while(|p| p.formula < target).count();
            self.pos += skip;
            return;
        }
        if rest.first().map_or(true, |p| p.formula >= target) {
            return;
        }
        // rest[lo] < target; find hi with rest[hi] >= target or past the end
        let mut lo = 0;
        let mut step = 1;
        let hi = loop {
            let probe = lo + step;
            if probe >= rest.len() {
                break rest.len();
            }
            if rest[probe].formula >= target {
                break probe;
            }
            lo = probe;
            step *= 2;
        };
        self.pos += lo + 1 + rest[lo + 1..hi].partition_point(|p| p.formula < target);
    }
}

struct SubCursor<'a> {
    cursor: Cursor<'a>,
    slot: usize,
}

/// Heap entry ordered so that the worst hit is at the top.
#[derive(PartialEq, Eq)]
struct Ranked {
    score: DiceScore,
    rank: u32,
    formula: FormulaId,
    matched: u64,
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .cmp(&self.score)
            .then(self.rank.cmp(&other.rank))
    }
}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Top-`k` formulae by Dice score, best first. Equal scores are ordered by
/// canonical string so the result does not depend on formula id assignment.
/// Formulae sharing no tuple with the query are not returned.
pub fn search(
    index: &Index,
    plan: &QueryPlan,
    k: usize,
    options: SearchOptions,
) -> Result<Vec<CandidateHit>, SearchError> {
    if k == 0 {
        return Err(SearchError::ZeroK);
    }
    if plan.query_size == 0 || index.formula_count() == 0 {
        return Ok(Vec::new());
    }
    let k = k.min(index.formula_count());
    let nq = plan.query_size;
    let wq = plan.wildcard_size();
    let gallop = options.galloping;

    // one slot per distinct tuple id so concrete and wildcard terms share
    // the candidate's remaining counts
    let mut slots: HashMap<TupleId, usize> = HashMap::new();
    let mut slot_of = |t: TupleId| {
        let n = slots.len();
        *slots.entry(t).or_insert(n)
    };

    let mut concrete: Vec<(Cursor, u32, usize)> = plan
        .concrete
        .iter()
        .filter_map(|c| c.id.map(|id| (Cursor::new(index.postings(id)), c.count, slot_of(id))))
        .collect();
    if options.long_postings_first {
        concrete.sort_by_key(|(c, _, _)| std::cmp::Reverse(c.list.len()));
    }
    let mut wildcard: Vec<(u32, Vec<SubCursor>)> = plan
        .wildcard
        .iter()
        .map(|w| {
            let subs = w
                .expansion
                .iter()
                .map(|&t| SubCursor {
                    cursor: Cursor::new(index.postings(t)),
                    slot: slot_of(t),
                })
                .collect();
            (w.count, subs)
        })
        .collect();
    let mut used = vec![0u32; slots.len()];
    let mut touched: Vec<usize> = Vec::new();

    let mut heap: BinaryHeap<Ranked> = BinaryHeap::with_capacity(k + 1);
    // once set, every wildcard-only candidate is known to lose and
    // candidates are enumerated from concrete cursors only
    let mut concrete_driven = wildcard.is_empty();

    loop {
        let mut next = concrete.iter().filter_map(|(c, _, _)| c.current()).min();
        if !concrete_driven {
            let w = wildcard
                .iter()
                .flat_map(|(_, subs)| subs.iter().filter_map(|s| s.cursor.current()))
                .min();
            next = match (next, w) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
        let Some(f) = next else { break };

        let threshold = (heap.len() == k).then(|| heap.peek().expect("full heap").score);
        let nc = u64::from(index.size(f));
        let beats = |bound_matched: u64, s: DiceScore| {
            DiceScore::new(bound_matched, nq + nc) >= s
        };
        let admissible = match threshold {
            Some(s) if options.size_threshold => beats(nq.min(nc), s),
            _ => true,
        };

        if admissible {
            let mut matched = 0u64;
            for (cursor, qc, slot) in &concrete {
                if cursor.current() == Some(f) {
                    let take = (*qc).min(cursor.count());
                    matched += u64::from(take);
                    used[*slot] += take;
                    touched.push(*slot);
                }
            }
            let wildcard_only = matched == 0;
            let skip = wildcard_only
                && options.skip_wildcard_only
                && threshold.is_some_and(|s| !beats(wq.min(nc), s));
            if !skip {
                for (qc, subs) in &mut wildcard {
                    let mut budget = *qc;
                    for sub in subs.iter_mut() {
                        if budget == 0 && options.wildcard_early_stop {
                            break;
                        }
                        if concrete_driven {
                            sub.cursor.seek(f, gallop);
                        }
                        if sub.cursor.current() == Some(f) {
                            let avail = sub.cursor.count() - used[sub.slot];
                            let take = budget.min(avail);
                            used[sub.slot] += take;
                            touched.push(sub.slot);
                            budget -= take;
                            matched += u64::from(take);
                        }
                    }
                }
                if matched > 0 {
                    let entry = Ranked {
                        score: DiceScore::new(matched, nq + nc),
                        rank: index.canonical_rank(f),
                        formula: f,
                        matched,
                    };
                    if heap.len() < k {
                        heap.push(entry);
                    } else if entry < *heap.peek().expect("full heap") {
                        heap.pop();
                        heap.push(entry);
                    }
                }
            }
            for slot in touched.drain(..) {
                used[slot] = 0;
            }
        }

        for (cursor, _, _) in &mut concrete {
            if cursor.current() == Some(f) {
                cursor.seek(f + 1, gallop);
            }
        }
        if !concrete_driven {
            for (_, subs) in &mut wildcard {
                for sub in subs.iter_mut() {
                    if sub.cursor.current() == Some(f) {
                        sub.cursor.seek(f + 1, gallop);
                    }
                }
            }
            if options.skip_wildcard_only && heap.len() == k {
                let s = heap.peek().expect("full heap").score;
                // 2·min(wq, nc)/(nq + nc) peaks at nc = wq
                concrete_driven = DiceScore::new(wq, nq + wq) < s;
            }
        }
    }

    let mut ranked = heap.into_vec();
    ranked.sort();
    Ok(ranked
        .into_iter()
        .map(|r| CandidateHit {
            formula: r.formula,
            matched: r.matched,
            score: r.score,
            doc_refs: index.occurrences(r.formula).to_vec(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{IndexBuilder, IndexParams};
    use crate::slt::{parse_mathml, Slt};
    use crate::tuples::{extract_tuples, Window};

    fn slt(m: &str) -> Slt {
        parse_mathml(&format!("<math>{m}</math>")).unwrap()
    }

    fn build(formulae: &[&str], params: IndexParams) -> Index {
        let mut b = IndexBuilder::new(params);
        for (i, m) in formulae.iter().enumerate() {
            b.add_formula(&format!("d{i}"), 0, &slt(m));
        }
        b.finish()
    }

    fn run(index: &Index, query: &str, k: usize, options: SearchOptions) -> Vec<(String, f64)> {
        let p = index.params();
        let plan = plan_query(index, &extract_tuples(&slt(query), p.window, p.eol));
        search(index, &plan, k, options)
            .unwrap()
            .into_iter()
            .map(|h| (index.formula(h.formula).to_owned(), h.score.value()))
            .collect()
    }

    const A_PLUS_B: &str = "<mi>a</mi><mo>+</mo><mi>b</mi>";
    const A_PLUS_C: &str = "<mi>a</mi><mo>+</mo><mi>c</mi>";
    const X_MINUS_Y: &str = "<mi>x</mi><mo>−</mo><mi>y</mi>";

    #[test]
    fn dice_over_three_candidates() {
        let index = build(&[A_PLUS_B, A_PLUS_C, X_MINUS_Y], IndexParams::new(Window::bounded(1), false));
        for options in [SearchOptions::all(), SearchOptions::none()] {
            let hits = run(&index, A_PLUS_B, 10, options);
            assert_eq!(
                hits,
                vec![
                    ("[V!a[n:+[n:V!b]]]".to_owned(), 1.0),
                    ("[V!a[n:+[n:V!c]]]".to_owned(), 0.5),
                ]
            );
        }
        assert_eq!(run(&index, A_PLUS_B, 1, SearchOptions::all()).len(), 1);
    }

    #[test]
    fn zero_k_is_an_error() {
        let index = build(&[A_PLUS_B], IndexParams::new(Window::bounded(1), false));
        let plan = plan_query(&index, &TupleBag::new());
        assert_eq!(search(&index, &plan, 0, SearchOptions::all()), Err(SearchError::ZeroK));
    }

    #[test]
    fn unknown_symbols_and_multi_wildcards_give_nothing() {
        let index = build(&[A_PLUS_B], IndexParams::new(Window::bounded(1), false));
        assert!(run(&index, "<mi>q</mi><mo>÷</mo><mi>r</mi>", 5, SearchOptions::all()).is_empty());

        let query = slt("<qvar name='a'/><qvar name='b'/>");
        let plan = plan_query(&index, &extract_tuples(&query, Window::bounded(1), false));
        assert_eq!(plan.ignored.len(), 1);
        assert_eq!(plan.query_size, 0);
        assert!(search(&index, &plan, 5, SearchOptions::all()).unwrap().is_empty());
    }

    #[test]
    fn wildcard_consumes_at_most_its_count() {
        // a+b+b+b: the (+, ?, n) tuple may claim one of the three (+, V!b, n)
        let index = build(
            &["<mi>a</mi><mo>+</mo><mi>b</mi><mo>+</mo><mi>b</mi><mo>+</mo><mi>b</mi>"],
            IndexParams::new(Window::bounded(1), false),
        );
        let query = slt("<mi>a</mi><mo>+</mo><qvar name='z'/>");
        let plan = plan_query(&index, &extract_tuples(&query, Window::bounded(1), false));
        assert_eq!(plan.wildcard.len(), 1);
        assert_eq!(plan.wildcard[0].count, 1);
        let hits = search(&index, &plan, 5, SearchOptions::all()).unwrap();
        assert_eq!(hits[0].matched, 2);
        assert_eq!(hits[0].score, DiceScore::new(2, 2 + 6));
    }

    #[test]
    fn concrete_tuples_are_allocated_before_wildcards() {
        // query x+? with both tuples able to claim the same (V!x, +, n)
        let index = build(&["<mi>x</mi><mo>+</mo>"], IndexParams::new(Window::bounded(1), false));
        let query = slt("<mi>x</mi><mo>+</mo><mi>x</mi><qvar name='w'/>");
        let plan = plan_query(&index, &extract_tuples(&query, Window::bounded(1), false));
        let hits = search(&index, &plan, 5, SearchOptions::none()).unwrap();
        assert_eq!(hits[0].matched, 1);
    }

    #[test]
    fn galloping_seek_matches_linear() {
        let list: Vec<Posting> = [1, 3, 4, 9, 12, 13, 40, 41, 90]
            .into_iter()
            .map(|formula| Posting { formula, count: 1 })
            .collect();
        for start in 0..list.len() {
            for target in 0..100 {
                let mut a = Cursor { list: &list, pos: start };
                let mut b = Cursor { list: &list, pos: start };
                a.seek(target, true);
                b.seek(target, false);
                assert_eq!(a.pos, b.pos, "start {start} target {target}");
            }
        }
    }

    #[test]
    fn dice_comparison_is_exact() {
        assert_eq!(DiceScore::new(1, 4), DiceScore::new(2, 8));
        assert!(DiceScore::new(1, 3) > DiceScore::new(1, 4));
        assert_eq!(DiceScore::new(3, 6).value(), 1.0);
    }
}
