// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

//! Maximum Subtree Similarity: the second-stage score of a candidate SLT
//! against the query SLT.
//!
//! For every pair of query and candidate nodes that unify, the largest
//! aligned subtree pair rooted there is grown edge by edge. Its aligned nodes
//! fall into partitions by (query label, candidate label); a greedy pass
//! picks label-consistent partitions as the matched set `M`, which is scored
//! as a [`ScoreTriple`]. The best triple over all root pairs wins.
//!
//! ```
//! use tangent::mss::mss;
//! use tangent::slt::parse_mathml;
//!
//! let q = parse_mathml("<math><mi>x</mi><mo>+</mo><mi>x</mi></math>").unwrap();
//! let c = parse_mathml("<math><mi>y</mi><mo>+</mo><mi>z</mi></math>").unwrap();
//! let best = mss(&q, &c);
//! assert_eq!(best.triple.to_string(), "(4/7, -1, 1)");
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use crate::slt::{EdgeLabel, NodeId, Slt, SymbolLabel, SymbolType};

/// Whether query label `q` may stand for candidate label `c`: variables
/// unify with variables, numbers with numbers, a query wildcard with
/// anything, and all other symbols only with themselves.
pub fn unifies(q: &SymbolLabel, c: &SymbolLabel) -> bool {
    match (q.symbol_type(), c.symbol_type()) {
        (SymbolType::Variable, SymbolType::Variable) => true,
        (SymbolType::Number, SymbolType::Number) => true,
        (SymbolType::Wildcard, _) => true,
        (SymbolType::Variable | SymbolType::Number, _) => false,
        _ => q == c,
    }
}

/// Edge-label preserving map from a subtree `T1` of the query onto a
/// subtree of the candidate.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alignment {
    /// `(query node, candidate node)`, increasing in query node. The first
    /// pair is the root pair.
    pairs: Vec<(NodeId, NodeId)>,
}

impl Alignment {
    pub fn pairs(&self) -> &[(NodeId, NodeId)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn root(&self) -> Option<(NodeId, NodeId)> {
        self.pairs.first().copied()
    }

    /// Image of a query node, if it is aligned.
    pub fn image(&self, query_node: NodeId) -> Option<NodeId> {
        self.pairs
            .binary_search_by_key(&query_node, |&(q, _)| q)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    pub fn query_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.pairs.iter().map(|&(q, _)| q)
    }
}

/// The maximally similar aligned subtree pair rooted at `(rq, rc)`, or
/// `None` if the roots do not unify.
///
/// A child subtree reached over the same edge label on both sides is grown
/// recursively from child roots that unify and is kept when adding it (with
/// its `m` unified nodes and `t` nodes) raises Dice's measure of the root
/// plus that subtree against the one-node baseline. Only unified nodes enter
/// the alignment, so every kept subtree has `m = t`.
pub fn maximally_similar_subtree(tq: &Slt, tc: &Slt, rq: NodeId, rc: NodeId) -> Option<Alignment> {
    if !unifies(tq.label(rq), tc.label(rc)) {
        return None;
    }
    let q_size = tq.len();
    let mut pairs = Vec::new();
    grow(tq, tc, rq, rc, q_size, &mut pairs);
    pairs.sort_unstable();
    Some(Alignment { pairs })
}

fn grow(tq: &Slt, tc: &Slt, q: NodeId, c: NodeId, q_size: usize, out: &mut Vec<(NodeId, NodeId)>) {
    out.push((q, c));
    for edge in EdgeLabel::ALL {
        let (Some(qc), Some(cc)) = (tq.child(q, edge), tc.child(c, edge)) else {
            continue;
        };
        if !unifies(tq.label(qc), tc.label(cc)) {
            continue;
        }
        let mark = out.len();
        grow(tq, tc, qc, cc, q_size, out);
        let t = out.len() - mark;
        let m = t;
        if (1 + m) * (1 + q_size) <= 1 + t + q_size {
            out.truncate(mark);
        }
    }
}

/// Aligned query nodes sharing one query label and one candidate label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlignmentPartition {
    /// Increasing query node ids.
    pub nodes: Vec<NodeId>,
    pub query_label: SymbolLabel,
    pub candidate_label: SymbolLabel,
}

impl AlignmentPartition {
    pub fn is_exact(&self) -> bool {
        self.query_label == self.candidate_label
    }
}

/// Partitions of the unified pairs of `alignment`, ordered by their first
/// node.
pub fn partitions(tq: &Slt, tc: &Slt, alignment: &Alignment) -> Vec<AlignmentPartition> {
    let mut groups: BTreeMap<(&SymbolLabel, &SymbolLabel), Vec<NodeId>> = BTreeMap::new();
    for &(q, c) in alignment.pairs() {
        let (lq, lc) = (tq.label(q), tc.label(c));
        if unifies(lq, lc) {
            groups.entry((lq, lc)).or_default().push(q);
        }
    }
    let mut parts: Vec<AlignmentPartition> = groups
        .into_iter()
        .map(|((lq, lc), nodes)| AlignmentPartition {
            nodes,
            query_label: lq.clone(),
            candidate_label: lc.clone(),
        })
        .collect();
    parts.sort_by_key(|p| p.nodes[0]);
    parts
}

/// Query nodes chosen as matched, with the alignment edges between them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchedSet {
    /// Increasing query node ids.
    pub nodes: Vec<NodeId>,
    /// `(parent, child)` query edges with both ends in `nodes`.
    pub edges: Vec<(NodeId, NodeId)>,
}

impl MatchedSet {
    pub fn contains(&self, node: NodeId) -> bool {
        self.nodes.binary_search(&node).is_ok()
    }
}

/// Greedy choice of partitions: largest first, exact-label partitions
/// before unified ones of the same size, then by smallest node id. A
/// partition is taken if neither its query label nor its candidate label is
/// already used by the matched set.
pub fn greedy_matched_set(tq: &Slt, alignment: &Alignment, parts: &[AlignmentPartition]) -> MatchedSet {
    let mut order: Vec<&AlignmentPartition> = parts.iter().collect();
    order.sort_by_key(|p| (std::cmp::Reverse(p.nodes.len()), !p.is_exact(), p.nodes[0]));
    let mut query_labels: HashSet<&SymbolLabel> = HashSet::new();
    let mut candidate_labels: HashSet<&SymbolLabel> = HashSet::new();
    let mut nodes = Vec::new();
    for p in order {
        if query_labels.contains(&p.query_label) || candidate_labels.contains(&p.candidate_label) {
            continue;
        }
        query_labels.insert(&p.query_label);
        candidate_labels.insert(&p.candidate_label);
        nodes.extend_from_slice(&p.nodes);
    }
    nodes.sort_unstable();
    let root = alignment.root().map(|(q, _)| q);
    let edges = nodes
        .iter()
        .filter(|&&n| Some(n) != root)
        .filter_map(|&n| tq.parent(n).map(|(p, _)| (p, n)))
        .filter(|(p, _)| nodes.binary_search(p).is_ok())
        .collect();
    MatchedSet { nodes, edges }
}

/// Lexicographically compared score; larger is better.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScoreTriple {
    /// Harmonic mean of the matched node and edge fractions of the query.
    pub h: Ratio<u64>,
    /// Minus the number of candidate nodes outside the matched set.
    pub neg_unmatched: i64,
    /// Matched nodes whose label equals the label of their image.
    pub exact: u32,
}

impl ScoreTriple {
    pub fn new(h: Ratio<u64>, neg_unmatched: i64, exact: u32) -> Self {
        ScoreTriple {
            h,
            neg_unmatched,
            exact,
        }
    }

    /// Score of a candidate with nothing matched.
    pub fn unmatched(candidate_size: usize) -> Self {
        ScoreTriple::new(Ratio::from_integer(0), -(candidate_size as i64), 0)
    }

    pub fn h_f64(&self) -> f64 {
        *self.h.numer() as f64 / *self.h.denom() as f64
    }
}

impl fmt::Display for ScoreTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.h, self.neg_unmatched, self.exact)
    }
}

impl Serialize for ScoreTriple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ScoreTriple", 4)?;
        st.serialize_field("h", &self.h_f64())?;
        st.serialize_field("hRatio", &self.h.to_string())?;
        st.serialize_field("negUnmatched", &self.neg_unmatched)?;
        st.serialize_field("exact", &self.exact)?;
        st.end()
    }
}

/// Score of `tc` against `tq` for one alignment and matched set.
///
/// With `Q = |Tq|`, `M = |M|` and `E = |E(M)|`, the first component is
/// `2 / (Q/M + (Q-1)/max(E, 1/2))`. A one-node query therefore scores 2 on
/// any match.
pub fn score(tq: &Slt, tc: &Slt, alignment: &Alignment, matched: &MatchedSet) -> ScoreTriple {
    let q = tq.len() as u64;
    let m = matched.nodes.len() as u64;
    let e = matched.edges.len() as u64;
    let h = if m == 0 {
        Ratio::from_integer(0)
    } else if e == 0 {
        Ratio::new(2 * m, q + 2 * (q - 1) * m)
    } else {
        Ratio::new(2 * m * e, q * e + (q - 1) * m)
    };
    let exact = matched
        .nodes
        .iter()
        .filter(|&&n| alignment.image(n).is_some_and(|c| tq.label(n) == tc.label(c)))
        .count() as u32;
    ScoreTriple::new(h, m as i64 - tc.len() as i64, exact)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MssResult {
    pub triple: ScoreTriple,
    pub matched: MatchedSet,
    /// Empty when no pair of nodes unifies.
    pub alignment: Alignment,
}

/// Maximum Subtree Similarity of `tc` with respect to `tq`: the best score
/// over all unifying root pairs, visited in pre-order of the query then the
/// candidate; the first pair reaching the maximum is kept.
pub fn mss(tq: &Slt, tc: &Slt) -> MssResult {
    let mut best = MssResult {
        triple: ScoreTriple::unmatched(tc.len()),
        matched: MatchedSet::default(),
        alignment: Alignment::default(),
    };
    let mut found = false;
    for rq in tq.node_ids() {
        for rc in tc.node_ids() {
            let Some(alignment) = maximally_similar_subtree(tq, tc, rq, rc) else {
                continue;
            };
            let parts = partitions(tq, tc, &alignment);
            let matched = greedy_matched_set(tq, &alignment, &parts);
            let triple = score(tq, tc, &alignment, &matched);
            if !found || triple > best.triple {
                best = MssResult {
                    triple,
                    matched,
                    alignment,
                };
                found = true;
            }
        }
    }
    best
}
