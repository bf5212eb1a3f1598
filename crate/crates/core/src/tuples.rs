// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

//! Symbol-pair tuples: the indexing unit.
//!
//! A tuple `(ancestor, descendant, path)` relates two symbols on a
//! root-to-leaf path of an SLT by the edge labels walked from the ancestor
//! down to the descendant. Only pairs at most `w` edges apart are emitted.
//! End-of-line tuples `(label, !0, [next])` optionally mark every node
//! without a `next` successor.

use std::collections::BTreeMap;
use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::slt::{EdgeLabel, Slt, SymbolLabel};

/// Maximum edge distance between the two symbols of a tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Window {
    Bounded(NonZeroUsize),
    Unbounded,
}

impl Window {
    /// # Panics
    /// If `w` is zero.
    pub fn bounded(w: usize) -> Window {
        Window::Bounded(NonZeroUsize::new(w).expect("window size must be positive"))
    }

    pub fn limit(self) -> Option<usize> {
        match self {
            Window::Bounded(w) => Some(w.get()),
            Window::Unbounded => None,
        }
    }

    pub fn admits(self, distance: usize) -> bool {
        self.limit().map_or(true, |w| distance <= w)
    }

    /// Header encoding: `0` stands for an unbounded window.
    pub fn to_u32(self) -> u32 {
        self.limit().map_or(0, |w| w as u32)
    }

    pub fn from_u32(w: u32) -> Window {
        NonZeroUsize::new(w as usize).map_or(Window::Unbounded, Window::Bounded)
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Bounded(w) => write!(f, "{w}"),
            Window::Unbounded => f.write_str("all"),
        }
    }
}

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "all" | "inf" | "∞" => Ok(Window::Unbounded),
            n => n
                .parse::<NonZeroUsize>()
                .map(Window::Bounded)
                .map_err(|_| format!("invalid window `{s}`: expected a positive integer or `all`")),
        }
    }
}

/// `(ancestor, descendant, path)` relationship between two symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tuple {
    pub ancestor: SymbolLabel,
    /// A symbol, or `!0` for end-of-line tuples.
    pub descendant: SymbolLabel,
    pub path: Vec<EdgeLabel>,
}

impl Tuple {
    pub fn new(ancestor: SymbolLabel, descendant: SymbolLabel, path: Vec<EdgeLabel>) -> Tuple {
        Tuple {
            ancestor,
            descendant,
            path,
        }
    }

    pub fn eol(last: SymbolLabel) -> Tuple {
        Tuple::new(last, SymbolLabel::eol(), vec![EdgeLabel::Next])
    }

    pub fn is_eol(&self) -> bool {
        self.descendant.is_eol()
    }

    /// Dictionary key: ancestor, descendant and path characters separated by
    /// tabs.
    pub fn key(&self) -> String {
        let path: String = self.path.iter().map(|e| e.as_char()).collect();
        format!("{}\t{}\t{}", self.ancestor, self.descendant, path)
    }

    pub fn from_key(key: &str) -> Option<Tuple> {
        let mut parts = key.split('\t');
        let (anc, desc, path) = (parts.next()?, parts.next()?, parts.next()?);
        if parts.next().is_some() || anc.is_empty() || desc.is_empty() || path.is_empty() {
            return None;
        }
        let path = path.chars().map(EdgeLabel::from_char).collect::<Option<Vec<_>>>()?;
        Some(Tuple::new(anc.into(), desc.into(), path))
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: String = self.path.iter().map(|e| e.arrow()).collect();
        write!(f, "({}, {}, {})", self.ancestor, self.descendant, path)
    }
}

/// Multiset of tuples with their counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TupleBag {
    entries: BTreeMap<Tuple, u32>,
    total: u64,
}

impl TupleBag {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, tuple: Tuple, count: u32) {
        if count == 0 {
            return;
        }
        *self.entries.entry(tuple).or_insert(0) += count;
        self.total += u64::from(count);
    }

    pub fn count(&self, tuple: &Tuple) -> u32 {
        self.entries.get(tuple).copied().unwrap_or(0)
    }

    /// Number of distinct tuples.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Entries in [`Tuple`] order.
    pub fn iter(&self) -> impl Iterator<Item = (&Tuple, u32)> + '_ {
        self.entries.iter().map(|(t, c)| (t, *c))
    }
}

impl FromIterator<(Tuple, u32)> for TupleBag {
    fn from_iter<I: IntoIterator<Item = (Tuple, u32)>>(iter: I) -> Self {
        let mut bag = TupleBag::new();
        for (t, c) in iter {
            bag.insert(t, c);
        }
        bag
    }
}

/// Tuples of `slt` whose symbols are at most `window` edges apart, plus one
/// end-of-line tuple per node without a `next` child when `eol` is set.
pub fn extract_tuples(slt: &Slt, window: Window, eol: bool) -> TupleBag {
    let mut bag = TupleBag::new();
    let mut up = Vec::new();
    for node in slt.node_ids() {
        // walk towards the root collecting the reversed path
        up.clear();
        let mut cur = node;
        while let Some((parent, edge)) = slt.parent(cur) {
            up.push(edge);
            if !window.admits(up.len()) {
                break;
            }
            let path: Vec<EdgeLabel> = up.iter().rev().copied().collect();
            bag.insert(
                Tuple::new(slt.label(parent).clone(), slt.label(node).clone(), path),
                1,
            );
            cur = parent;
        }
        if eol && slt.child(node, EdgeLabel::Next).is_none() {
            bag.insert(Tuple::eol(slt.label(node).clone()), 1);
        }
    }
    bag
}

/// Which end of a single-wildcard tuple is the wildcard.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WildcardEnd {
    Ancestor,
    Descendant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryTupleClass {
    Concrete,
    SingleWildcard(WildcardEnd),
    MultiWildcard,
}

/// Classify a query tuple by the number of wildcard symbols it holds. The
/// end-of-line marker is never a wildcard.
pub fn classify_query_tuple(tuple: &Tuple) -> QueryTupleClass {
    match (tuple.ancestor.is_wildcard(), tuple.descendant.is_wildcard()) {
        (false, false) => QueryTupleClass::Concrete,
        (true, false) => QueryTupleClass::SingleWildcard(WildcardEnd::Ancestor),
        (false, true) => QueryTupleClass::SingleWildcard(WildcardEnd::Descendant),
        (true, true) => QueryTupleClass::MultiWildcard,
    }
}

/// A tuple with one end replaced by "any symbol". Wildcard names are erased.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WildcardPattern {
    /// The end that matches anything.
    pub open_end: WildcardEnd,
    /// Label required at the other end.
    pub fixed: SymbolLabel,
    pub path: Vec<EdgeLabel>,
}

impl WildcardPattern {
    /// Pattern for a single-wildcard query tuple.
    pub fn from_query_tuple(tuple: &Tuple) -> Option<WildcardPattern> {
        match classify_query_tuple(tuple) {
            QueryTupleClass::SingleWildcard(end) => Some(Self::open_at(tuple, end)),
            _ => None,
        }
    }

    /// Both single-wildcard generalizations of an indexed tuple.
    pub fn generalizations(tuple: &Tuple) -> [WildcardPattern; 2] {
        [
            Self::open_at(tuple, WildcardEnd::Ancestor),
            Self::open_at(tuple, WildcardEnd::Descendant),
        ]
    }

    fn open_at(tuple: &Tuple, end: WildcardEnd) -> WildcardPattern {
        let fixed = match end {
            WildcardEnd::Ancestor => tuple.descendant.clone(),
            WildcardEnd::Descendant => tuple.ancestor.clone(),
        };
        WildcardPattern {
            open_end: end,
            fixed,
            path: tuple.path.clone(),
        }
    }

    pub fn matches(&self, tuple: &Tuple) -> bool {
        let fixed = match self.open_end {
            WildcardEnd::Ancestor => &tuple.descendant,
            WildcardEnd::Descendant => &tuple.ancestor,
        };
        *fixed == self.fixed && tuple.path == self.path
    }
}

impl fmt::Display for WildcardPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: String = self.path.iter().map(|e| e.arrow()).collect();
        match self.open_end {
            WildcardEnd::Ancestor => write!(f, "(*, {}, {path})", self.fixed),
            WildcardEnd::Descendant => write!(f, "({}, *, {path})", self.fixed),
        }
    }
}
