// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls the library's tuple extraction, search or scoring.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;
use tangent::index::{Index, IndexBuilder, IndexParams};
use tangent::mss::ScoreTriple;
use tangent::slt::{EdgeLabel, NodeId, Slt, SymbolLabel};
use tangent::synth;
use tangent::tuples::{Tuple, WildcardEnd, WildcardPattern, Window};

pub type Bag = BTreeMap<Tuple, u32>;

/// Root-to-node edge labels of every node.
fn root_paths(t: &Slt) -> Vec<Vec<(NodeId, EdgeLabel)>> {
    let mut paths: Vec<Vec<(NodeId, EdgeLabel)>> = vec![Vec::new(); t.len()];
    // pre-order guarantees parents come first
    for n in t.node_ids() {
        if let Some((p, e)) = t.parent(n) {
            let mut path = paths[p].clone();
            path.push((p, e));
            paths[n] = path;
        }
    }
    paths
}

/// All (ancestor, descendant) pairs at most `w` edges apart, plus EOL tuples.
pub fn tuples(t: &Slt, w: Window, eol: bool) -> Bag {
    let paths = root_paths(t);
    let mut bag = Bag::new();
    for d in t.node_ids() {
        let chain = &paths[d];
        for (depth, &(a, _)) in chain.iter().enumerate() {
            let path: Vec<EdgeLabel> = chain[depth..].iter().map(|&(_, e)| e).collect();
            if w.limit().is_some_and(|w| path.len() > w) {
                continue;
            }
            *bag.entry(Tuple::new(t.label(a).clone(), t.label(d).clone(), path))
                .or_default() += 1;
        }
        if eol && t.children(d).all(|(e, _)| e != EdgeLabel::Next) {
            *bag.entry(Tuple::new(t.label(d).clone(), SymbolLabel::eol(), vec![EdgeLabel::Next]))
                .or_default() += 1;
        }
    }
    bag
}

pub fn bag_total(bag: &Bag) -> u64 {
    bag.values().map(|&c| u64::from(c)).sum()
}

fn wild(l: &SymbolLabel) -> bool {
    l.as_str().len() > 1 && l.as_str().starts_with('?')
}

/// `(query size, matched)` under greedy counting: concrete query tuples take
/// min counts first; then each wildcard pattern (query tuples merged by
/// pattern, patterns in order) takes what is left of the candidate tuples it
/// matches, visiting them in tuple order, up to its query count.
pub fn greedy_overlap(query: &Bag, cand: &Bag) -> (u64, u64) {
    let mut left: BTreeMap<&Tuple, u32> = cand.iter().map(|(t, &c)| (t, c)).collect();
    let mut size = 0u64;
    let mut matched = 0u64;
    let mut patterns: BTreeMap<WildcardPattern, u32> = BTreeMap::new();
    for (t, &qc) in query {
        match (wild(&t.ancestor), wild(&t.descendant)) {
            (false, false) => {
                size += u64::from(qc);
                if let Some(c) = left.get_mut(t) {
                    let take = qc.min(*c);
                    *c -= take;
                    matched += u64::from(take);
                }
            }
            (true, true) => {}
            _ => {
                size += u64::from(qc);
                let p = WildcardPattern::from_query_tuple(t).expect("one wildcard");
                *patterns.entry(p).or_default() += qc;
            }
        }
    }
    for (p, qc) in patterns {
        let mut budget = qc;
        for (t, c) in left.iter_mut() {
            let fits = t.path == p.path
                && match p.open_end {
                    WildcardEnd::Ancestor => t.descendant == p.fixed,
                    WildcardEnd::Descendant => t.ancestor == p.fixed,
                };
            if fits {
                let take = budget.min(*c);
                *c -= take;
                budget -= take;
                matched += u64::from(take);
            }
        }
    }
    (size, matched)
}

/// Exhaustive top-k: `(canonical, matched, query size + candidate size)`,
/// best first, equal scores by canonical string.
pub fn top_k(corpus: &[(String, Bag)], query: &Bag, k: usize) -> Vec<(String, u64, u64)> {
    let mut all: Vec<(String, u64, u64)> = corpus
        .iter()
        .filter_map(|(canon, bag)| {
            let (nq, m) = greedy_overlap(query, bag);
            (m > 0).then(|| (canon.clone(), m, nq + bag_total(bag)))
        })
        .collect();
    all.sort_by(|a, b| {
        (u128::from(b.1) * u128::from(a.2))
            .cmp(&(u128::from(a.1) * u128::from(b.2)))
            .then_with(|| a.0.cmp(&b.0))
    });
    all.truncate(k);
    all
}

/// Distinct formulae of `trees` with their oracle bags.
pub fn oracle_corpus(trees: &[Slt], w: Window, eol: bool) -> Vec<(String, Bag)> {
    let mut seen = HashSet::new();
    trees
        .iter()
        .filter(|t| seen.insert(t.canonical_string()))
        .map(|t| (t.canonical_string(), tuples(t, w, eol)))
        .collect()
}

pub fn build(trees: &[Slt], params: IndexParams) -> Index {
    let mut b = IndexBuilder::new(params);
    for (i, t) in trees.iter().enumerate() {
        b.add_formula(&format!("doc{i}"), 0, t);
    }
    b.finish()
}

/// Queries: corpus members, perturbed members, fresh trees, and
/// `wildcards` single-wildcard variants, `count` in total.
pub fn queries<R: Rng>(rng: &mut R, corpus: &[Slt], count: usize, wildcards: usize) -> Vec<Slt> {
    let alphabet = synth::default_alphabet();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let base = corpus.choose(rng).expect("non-empty corpus");
        let q = if i < wildcards {
            let p = synth::perturb(rng, base, 0.2, &alphabet);
            synth::with_wildcards(rng, &p, 1)
        } else {
            match i % 3 {
                0 => base.clone(),
                1 => synth::perturb(rng, base, 0.3, &alphabet),
                _ => {
                    let n = rng.gen_range(2..=10);
                    synth::random_slt(rng, n, &alphabet)
                }
            }
        };
        out.push(q);
    }
    out
}

// ---------------------------------------------------------------------------
// Subtree similarity

fn oracle_unifies(q: &SymbolLabel, c: &SymbolLabel) -> bool {
    let kind = |l: &SymbolLabel| {
        let s = l.as_str();
        if wild(l) {
            'W'
        } else if s.starts_with("V!") {
            'V'
        } else if s.starts_with("N!") {
            'N'
        } else {
            'o'
        }
    };
    match (kind(q), kind(c)) {
        ('W', _) => true,
        ('V', 'V') | ('N', 'N') => true,
        ('V', _) | ('N', _) => false,
        _ => q == c,
    }
}

/// Every connected node set of `tq` rooted at `rq` that maps onto `tc` along
/// equal edge labels from `rc`, as a map query node → candidate node.
/// With `unified_only`, every node must unify with its image.
pub fn aligned_subtrees(
    tq: &Slt,
    tc: &Slt,
    rq: NodeId,
    rc: NodeId,
    unified_only: bool,
) -> Vec<BTreeMap<NodeId, NodeId>> {
    // candidate nodes reachable from rq through its descendants
    let below: Vec<NodeId> = tq
        .node_ids()
        .filter(|&n| {
            let mut cur = n;
            loop {
                if cur == rq {
                    return true;
                }
                match tq.parent(cur) {
                    Some((p, _)) => cur = p,
                    None => return false,
                }
            }
        })
        .collect();
    let mut out = Vec::new();
    let others: Vec<NodeId> = below.iter().copied().filter(|&n| n != rq).collect();
    for mask in 0u32..(1 << others.len()) {
        let mut map = BTreeMap::from([(rq, rc)]);
        let chosen: HashSet<NodeId> = others
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &n)| n)
            .collect();
        let mut ok = true;
        // nodes in pre-order: parents are mapped before children
        for &n in &others {
            if !chosen.contains(&n) {
                continue;
            }
            let (p, e) = tq.parent(n).expect("below the root");
            let Some(&pc) = map.get(&p) else {
                ok = false;
                break;
            };
            let Some(c) = tc.child(pc, e) else {
                ok = false;
                break;
            };
            map.insert(n, c);
        }
        if ok && unified_only && !map.iter().all(|(&q, &c)| oracle_unifies(tq.label(q), tc.label(c))) {
            ok = false;
        }
        if ok && oracle_unifies(tq.label(rq), tc.label(rc)) {
            out.push(map);
        }
    }
    out
}

type Partition = (Vec<NodeId>, SymbolLabel, SymbolLabel);

fn oracle_partitions(tq: &Slt, tc: &Slt, map: &BTreeMap<NodeId, NodeId>) -> Vec<Partition> {
    let mut groups: HashMap<(SymbolLabel, SymbolLabel), Vec<NodeId>> = HashMap::new();
    for (&q, &c) in map {
        if oracle_unifies(tq.label(q), tc.label(c)) {
            groups
                .entry((tq.label(q).clone(), tc.label(c).clone()))
                .or_default()
                .push(q);
        }
    }
    groups.into_iter().map(|((a, b), n)| (n, a, b)).collect()
}

/// Repeatedly add the largest partition whose labels are unused, preferring
/// exact partitions, then the one holding the smallest node.
fn oracle_greedy(parts: &[Partition]) -> Vec<NodeId> {
    let mut taken = vec![false; parts.len()];
    let mut qls: HashSet<&SymbolLabel> = HashSet::new();
    let mut cls: HashSet<&SymbolLabel> = HashSet::new();
    let mut m = Vec::new();
    loop {
        let mut best: Option<usize> = None;
        for (i, (nodes, ql, cl)) in parts.iter().enumerate() {
            if taken[i] || qls.contains(ql) || cls.contains(cl) {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => {
                    let (bn, bq, bc) = &parts[b];
                    let key = |n: &Vec<NodeId>, q: &SymbolLabel, c: &SymbolLabel| {
                        (n.len(), q == c, std::cmp::Reverse(*n.iter().min().unwrap()))
                    };
                    key(nodes, ql, cl) > key(bn, bq, bc)
                }
            };
            if better {
                best = Some(i);
            }
        }
        let Some(b) = best else { break };
        taken[b] = true;
        qls.insert(&parts[b].1);
        cls.insert(&parts[b].2);
        m.extend(parts[b].0.iter().copied());
    }
    m.sort_unstable();
    m
}

/// Triple of a matched set straight from the definition.
pub fn oracle_score(tq: &Slt, tc: &Slt, map: &BTreeMap<NodeId, NodeId>, m: &[NodeId]) -> ScoreTriple {
    let q = tq.len() as i64;
    let mset: HashSet<NodeId> = m.iter().copied().collect();
    let root = *map.keys().next().expect("non-empty alignment");
    let edges = m
        .iter()
        .filter(|&&n| n != root && tq.parent(n).is_some_and(|(p, _)| mset.contains(&p)))
        .count() as i64;
    let h = if m.is_empty() {
        Ratio::from_integer(0)
    } else {
        let nodes_part = Ratio::new(q, m.len() as i64);
        let edge_den = if edges == 0 { Ratio::new(1, 2) } else { Ratio::from_integer(edges) };
        let r = Ratio::from_integer(2) / (nodes_part + Ratio::from_integer(q - 1) / edge_den);
        Ratio::new(*r.numer() as u64, *r.denom() as u64)
    };
    let exact = m.iter().filter(|&&n| tq.label(n) == tc.label(map[&n])).count() as u32;
    ScoreTriple::new(h, m.len() as i64 - tc.len() as i64, exact)
}

/// Best triple over all unifying root pairs; at each pair the aligned
/// subtree is the one of highest Dice measure `2m/(|T1|+|Tq|)` among all
/// fully unified aligned subtrees (ties to the larger), scored with the
/// greedy matched set.
pub fn oracle_mss(tq: &Slt, tc: &Slt) -> ScoreTriple {
    let mut best: Option<ScoreTriple> = None;
    for rq in tq.node_ids() {
        for rc in tc.node_ids() {
            let Some(map) = best_aligned(tq, tc, rq, rc, true) else {
                continue;
            };
            let m = oracle_greedy(&oracle_partitions(tq, tc, &map));
            let s = oracle_score(tq, tc, &map, &m);
            best = Some(best.map_or(s, |b| b.max(s)));
        }
    }
    best.unwrap_or_else(|| ScoreTriple::unmatched(tc.len()))
}

fn best_aligned(
    tq: &Slt,
    tc: &Slt,
    rq: NodeId,
    rc: NodeId,
    unified_only: bool,
) -> Option<BTreeMap<NodeId, NodeId>> {
    let q = tq.len() as u64;
    aligned_subtrees(tq, tc, rq, rc, unified_only)
        .into_iter()
        .max_by(|a, b| {
            let m = |x: &BTreeMap<NodeId, NodeId>| {
                x.iter().filter(|(&n, &c)| oracle_unifies(tq.label(n), tc.label(c))).count() as u64
            };
            let (ma, mb) = (m(a), m(b));
            let (ta, tb) = (a.len() as u64, b.len() as u64);
            (ma * (tb + q))
                .cmp(&(mb * (ta + q)))
                .then(ta.cmp(&tb))
        })
}

/// Best triple at any root pair when the matched set is chosen optimally
/// among all label-consistent unions of partitions (not only greedily).
pub fn optimal_matched_mss(tq: &Slt, tc: &Slt) -> ScoreTriple {
    let mut best = ScoreTriple::unmatched(tc.len());
    for rq in tq.node_ids() {
        for rc in tc.node_ids() {
            let Some(map) = best_aligned(tq, tc, rq, rc, true) else {
                continue;
            };
            let parts = oracle_partitions(tq, tc, &map);
            for mask in 0u32..(1 << parts.len()) {
                let chosen: Vec<&Partition> = parts
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, p)| p)
                    .collect();
                let ql: HashSet<&SymbolLabel> = chosen.iter().map(|p| &p.1).collect();
                let cl: HashSet<&SymbolLabel> = chosen.iter().map(|p| &p.2).collect();
                if ql.len() != chosen.len() || cl.len() != chosen.len() {
                    continue;
                }
                let mut m: Vec<NodeId> = chosen.iter().flat_map(|p| p.0.iter().copied()).collect();
                m.sort_unstable();
                best = best.max(oracle_score(tq, tc, &map, &m));
            }
        }
    }
    best
}

/// Best triple when aligned subtrees may also pass through nodes that do
/// not unify (they are aligned but never matched).
pub fn bridged_mss(tq: &Slt, tc: &Slt) -> ScoreTriple {
    let mut best = ScoreTriple::unmatched(tc.len());
    for rq in tq.node_ids() {
        for rc in tc.node_ids() {
            let Some(map) = best_aligned(tq, tc, rq, rc, false) else {
                continue;
            };
            let m = oracle_greedy(&oracle_partitions(tq, tc, &map));
            best = best.max(oracle_score(tq, tc, &map, &m));
        }
    }
    best
}

/// Small labels so that unification is frequent.
pub fn mss_alphabet() -> Vec<SymbolLabel> {
    ["V!a", "V!b", "V!x", "N!1", "N!2", "+", "=", "F!", "M!()1x1"]
        .into_iter()
        .map(SymbolLabel::new)
        .collect()
}

/// A random (query, candidate) pair with at most `max_nodes` nodes each;
/// candidates are often perturbed copies of the query.
pub fn mss_pair<R: Rng>(rng: &mut R, max_nodes: usize) -> (Slt, Slt) {
    let alphabet = mss_alphabet();
    let nq = rng.gen_range(1..=max_nodes);
    let mut q = synth::random_slt(rng, nq, &alphabet);
    if rng.gen_bool(0.2) {
        q = synth::with_wildcards(rng, &q, 1);
    }
    let c = if rng.gen_bool(0.5) {
        let base = synth::relabel(&q, |n| wild(q.label(n)).then(|| alphabet.choose(rng).unwrap().clone()));
        synth::perturb(rng, &base, 0.3, &alphabet)
    } else {
        let nc = rng.gen_range(1..=max_nodes);
        synth::random_slt(rng, nc, &alphabet)
    };
    (q, c)
}
