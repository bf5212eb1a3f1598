// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

//! Symbol Layout Trees.
//!
//! An SLT records the *appearance* of a formula: nodes are typed symbols and
//! visual containers (fractions, radicals, matrices), edges are the spatial
//! relationships between them. Every node has at most one outgoing edge per
//! [`EdgeLabel`], and the root is the leftmost symbol on the main baseline.
//!
//! Trees are stored in canonical pre-order: node `0` is the root and the
//! children of a node are visited in [`EdgeLabel::ALL`] order. Two SLTs with
//! the same shape and labels therefore have identical node numbering, which
//! makes node ids usable as stable tie-breakers.

mod canonical;
mod mathml;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mathml::{parse_mathml, ParseError};

/// Index of a node inside an [`Slt`]; the root is always `0`.
pub type NodeId = usize;

/// Text label of an SLT node, e.g. `V!x`, `N!2`, `M!()2x1`, `?x0` or `+`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolLabel(String);

impl SymbolLabel {
    /// End-of-line terminal. Only ever appears inside tuples.
    pub const EOL: &'static str = "!0";

    pub fn new(text: impl Into<String>) -> Self {
        SymbolLabel(text.into())
    }

    pub fn eol() -> Self {
        SymbolLabel(Self::EOL.to_owned())
    }

    pub fn variable(name: &str) -> Self {
        SymbolLabel(format!("V!{name}"))
    }

    pub fn number(literal: &str) -> Self {
        SymbolLabel(format!("N!{literal}"))
    }

    pub fn text(fragment: &str) -> Self {
        SymbolLabel(format!("T!{fragment}"))
    }

    pub fn fraction() -> Self {
        SymbolLabel("F!".to_owned())
    }

    pub fn radical() -> Self {
        SymbolLabel("R!".to_owned())
    }

    pub fn wildcard(name: &str) -> Self {
        SymbolLabel(format!("?{name}"))
    }

    /// `M!` label for an `rows` x `cols` structure between optional fences.
    pub fn matrix(fences: &str, rows: usize, cols: usize) -> Self {
        SymbolLabel(format!("M!{fences}{rows}x{cols}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn symbol_type(&self) -> SymbolType {
        node_type(self)
    }

    pub fn is_wildcard(&self) -> bool {
        self.symbol_type() == SymbolType::Wildcard
    }

    pub fn is_eol(&self) -> bool {
        self.0 == Self::EOL
    }
}

impl fmt::Display for SymbolLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SymbolLabel {
    fn from(s: &str) -> Self {
        SymbolLabel::new(s)
    }
}

/// Node type derived from a label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolType {
    Variable,
    Number,
    Text,
    Fraction,
    Radical,
    /// Matrix dimensions are part of the type; fence characters are not.
    Matrix { rows: usize, cols: usize },
    Whitespace,
    Wildcard,
    Operator,
}

/// Type of a node label.
///
/// Labels starting with `?` (and longer than the bare `?` operator) are
/// wildcards. `M!` labels must end in `RxC`; the fence characters between
/// `M!` and the dimensions are dropped. Other typed labels are a single type
/// character followed by `!`, and everything else is an operator.
///
/// ```
/// use tangent::slt::{node_type, SymbolLabel, SymbolType};
///
/// assert_eq!(node_type(&"M![]2x3".into()), SymbolType::Matrix { rows: 2, cols: 3 });
/// assert_eq!(node_type(&"+".into()), SymbolType::Operator);
/// ```
pub fn node_type(label: &SymbolLabel) -> SymbolType {
    let text = label.as_str();
    if text.len() > 1 && text.starts_with('?') {
        return SymbolType::Wildcard;
    }
    let mut chars = text.chars();
    let (Some(prefix), Some('!')) = (chars.next(), chars.next()) else {
        return SymbolType::Operator;
    };
    match prefix {
        'V' => SymbolType::Variable,
        'N' => SymbolType::Number,
        'T' => SymbolType::Text,
        'F' => SymbolType::Fraction,
        'R' => SymbolType::Radical,
        'W' => SymbolType::Whitespace,
        'M' => matrix_dims(&text[2..])
            .map(|(rows, cols)| SymbolType::Matrix { rows, cols })
            .unwrap_or(SymbolType::Operator),
        _ => SymbolType::Operator,
    }
}

fn matrix_dims(rest: &str) -> Option<(usize, usize)> {
    let (head, cols) = rest.rsplit_once('x')?;
    let cols_ok = !cols.is_empty() && cols.bytes().all(|b| b.is_ascii_digit());
    let digits = head.bytes().rev().take_while(u8::is_ascii_digit).count();
    if !cols_ok || digits == 0 {
        return None;
    }
    let rows = head[head.len() - digits..].parse().ok()?;
    let cols = cols.parse().ok()?;
    (rows >= 1 && cols >= 1).then_some((rows, cols))
}

/// Spatial relationship between a node and one of its children.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeLabel {
    /// Adjacent object to the right on the same line.
    Next,
    /// Radicand, or first cell (row-major) of a matrix.
    Within,
    /// Following cell (row-major) of a matrix.
    Element,
    /// Superscript, over-script, numerator or radical index.
    Above,
    /// Subscript, under-script or denominator.
    Below,
    PreAbove,
    PreBelow,
}

impl EdgeLabel {
    /// All labels in canonical child order.
    pub const ALL: [EdgeLabel; 7] = [
        EdgeLabel::Next,
        EdgeLabel::Within,
        EdgeLabel::Element,
        EdgeLabel::Above,
        EdgeLabel::Below,
        EdgeLabel::PreAbove,
        EdgeLabel::PreBelow,
    ];

    pub fn as_char(self) -> char {
        match self {
            EdgeLabel::Next => 'n',
            EdgeLabel::Within => 'w',
            EdgeLabel::Element => 'e',
            EdgeLabel::Above => 'a',
            EdgeLabel::Below => 'b',
            EdgeLabel::PreAbove => 'A',
            EdgeLabel::PreBelow => 'B',
        }
    }

    pub fn from_char(c: char) -> Option<EdgeLabel> {
        EdgeLabel::ALL.into_iter().find(|e| e.as_char() == c)
    }

    /// Arrow glyph used in figures and text dumps.
    pub fn arrow(self) -> char {
        match self {
            EdgeLabel::Next => '→',
            EdgeLabel::Within => '⊡',
            EdgeLabel::Element => '⊸',
            EdgeLabel::Above => '↑',
            EdgeLabel::Below => '↓',
            EdgeLabel::PreAbove => '⇑',
            EdgeLabel::PreBelow => '⇓',
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SltError {
    #[error("node {node} already has a `{edge}` child")]
    DuplicateEdge { node: NodeId, edge: EdgeLabel },
    #[error("unknown parent node {0}")]
    UnknownNode(NodeId),
    #[error("label `{0}` is reserved for end-of-line tuples")]
    ReservedLabel(String),
    #[error("invalid canonical string at byte {pos}: {reason}")]
    Canonical { pos: usize, reason: &'static str },
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    label: SymbolLabel,
    parent: Option<(NodeId, EdgeLabel)>,
    children: [Option<NodeId>; 7],
}

/// A Symbol Layout Tree in canonical pre-order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slt {
    nodes: Vec<Node>,
}

impl Slt {
    /// Single-node tree.
    pub fn leaf(label: SymbolLabel) -> Result<Slt, SltError> {
        SltBuilder::new(label).map(SltBuilder::finish)
    }

    pub fn root(&self) -> NodeId {
        0
    }

    /// Number of nodes, `|T|`. Always at least one.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label(&self, node: NodeId) -> &SymbolLabel {
        &self.nodes[node].label
    }

    pub fn parent(&self, node: NodeId) -> Option<(NodeId, EdgeLabel)> {
        self.nodes[node].parent
    }

    pub fn child(&self, node: NodeId, edge: EdgeLabel) -> Option<NodeId> {
        self.nodes[node].children[edge.slot()]
    }

    /// Children of `node` in canonical edge order.
    pub fn children(&self, node: NodeId) -> impl Iterator<Item = (EdgeLabel, NodeId)> + '_ {
        EdgeLabel::ALL
            .into_iter()
            .filter_map(move |e| self.child(node, e).map(|c| (e, c)))
    }

    pub fn node_ids(&self) -> std::ops::Range<NodeId> {
        0..self.nodes.len()
    }

    /// All `(parent, child, label)` edges in pre-order of the child.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, EdgeLabel)> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(id, n)| n.parent.map(|(p, e)| (p, id, e)))
    }

    pub fn is_leaf(&self, node: NodeId) -> bool {
        self.nodes[node].children.iter().all(Option::is_none)
    }

    /// Number of edges between `node` and the root.
    pub fn depth(&self, node: NodeId) -> usize {
        let mut depth = 0;
        let mut cur = node;
        while let Some((p, _)) = self.nodes[cur].parent {
            depth += 1;
            cur = p;
        }
        depth
    }

    /// Deterministic serialization: `[` label, then for every child in edge
    /// order `[` edge-char `:` subtree `]`, then `]`. Brackets and
    /// backslashes inside labels are escaped with a backslash.
    pub fn canonical_string(&self) -> String {
        canonical::write(self)
    }

    /// Inverse of [`Slt::canonical_string`].
    pub fn from_canonical(text: &str) -> Result<Slt, SltError> {
        canonical::parse(text)
    }
}

impl fmt::Display for Slt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_string())
    }
}

/// Incremental tree construction. Node ids handed out by the builder are
/// provisional; [`SltBuilder::finish`] renumbers into canonical pre-order.
#[derive(Clone, Debug)]
pub struct SltBuilder {
    nodes: Vec<Node>,
}

impl SltBuilder {
    pub fn new(root: SymbolLabel) -> Result<Self, SltError> {
        check_label(&root)?;
        Ok(SltBuilder {
            nodes: vec![Node {
                label: root,
                parent: None,
                children: [None; 7],
            }],
        })
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn has_child(&self, parent: NodeId, edge: EdgeLabel) -> bool {
        self.nodes
            .get(parent)
            .is_some_and(|n| n.children[edge.slot()].is_some())
    }

    pub fn add_child(
        &mut self,
        parent: NodeId,
        edge: EdgeLabel,
        label: SymbolLabel,
    ) -> Result<NodeId, SltError> {
        check_label(&label)?;
        let slot = self
            .nodes
            .get(parent)
            .ok_or(SltError::UnknownNode(parent))?
            .children[edge.slot()];
        if slot.is_some() {
            return Err(SltError::DuplicateEdge { node: parent, edge });
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            label,
            parent: Some((parent, edge)),
            children: [None; 7],
        });
        self.nodes[parent].children[edge.slot()] = Some(id);
        Ok(id)
    }

    pub fn finish(self) -> Slt {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0];
        while let Some(id) = stack.pop() {
            order.push(id);
            for child in self.nodes[id].children.iter().rev().flatten() {
                stack.push(*child);
            }
        }
        let mut new_id = vec![0; self.nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            new_id[old] = new;
        }
        let nodes = order
            .iter()
            .map(|&old| {
                let n = &self.nodes[old];
                Node {
                    label: n.label.clone(),
                    parent: n.parent.map(|(p, e)| (new_id[p], e)),
                    children: n.children.map(|c| c.map(|c| new_id[c])),
                }
            })
            .collect();
        Slt { nodes }
    }
}

fn check_label(label: &SymbolLabel) -> Result<(), SltError> {
    if label.is_eol() {
        Err(SltError::ReservedLabel(label.as_str().to_owned()))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_types_from_labels() {
        let ty = |s: &str| node_type(&SymbolLabel::new(s));
        assert_eq!(ty("V!x"), SymbolType::Variable);
        assert_eq!(ty("N!3.14"), SymbolType::Number);
        assert_eq!(ty("T!lim"), SymbolType::Text);
        assert_eq!(ty("F!"), SymbolType::Fraction);
        assert_eq!(ty("R!"), SymbolType::Radical);
        assert_eq!(ty("W!"), SymbolType::Whitespace);
        assert_eq!(ty("?x0"), SymbolType::Wildcard);
        assert_eq!(ty("M![]2x3"), SymbolType::Matrix { rows: 2, cols: 3 });
        assert_eq!(ty("M!2x3"), SymbolType::Matrix { rows: 2, cols: 3 });
        assert_eq!(ty("+"), SymbolType::Operator);
        assert_eq!(ty("!"), SymbolType::Operator);
        assert_eq!(ty("?"), SymbolType::Operator);
        assert_eq!(ty("!0"), SymbolType::Operator);
    }

    #[test]
    fn matrix_type_ignores_fences() {
        let a = SymbolLabel::new("M!()2x1");
        let b = SymbolLabel::new("M![]2x1");
        assert_ne!(a, b);
        assert_eq!(node_type(&a), node_type(&b));
        assert_eq!(node_type(&a), SymbolType::Matrix { rows: 2, cols: 1 });
        // fences may themselves be digits-free brackets like `||`
        assert_eq!(
            node_type(&"M!||1x1".into()),
            SymbolType::Matrix { rows: 1, cols: 1 }
        );
        assert_eq!(node_type(&"M!()0x1".into()), SymbolType::Operator);
        assert_eq!(node_type(&"M!()x1".into()), SymbolType::Operator);
    }

    #[test]
    fn builder_rejects_repeated_edge() {
        let mut b = SltBuilder::new("V!a".into()).unwrap();
        b.add_child(0, EdgeLabel::Next, "+".into()).unwrap();
        assert_eq!(
            b.add_child(0, EdgeLabel::Next, "-".into()),
            Err(SltError::DuplicateEdge {
                node: 0,
                edge: EdgeLabel::Next
            })
        );
        assert_eq!(
            b.add_child(0, EdgeLabel::Above, SymbolLabel::eol()),
            Err(SltError::ReservedLabel("!0".into()))
        );
    }

    #[test]
    fn finish_renumbers_in_canonical_preorder() {
        let mut b = SltBuilder::new("V!x".into()).unwrap();
        // insert the superscript before the next-sibling; pre-order puts `n` first
        let sup = b.add_child(0, EdgeLabel::Above, "N!2".into()).unwrap();
        let plus = b.add_child(0, EdgeLabel::Next, "+".into()).unwrap();
        b.add_child(plus, EdgeLabel::Next, "V!y".into()).unwrap();
        b.add_child(sup, EdgeLabel::Next, "V!z".into()).unwrap();
        let t = b.finish();
        let labels: Vec<_> = t.node_ids().map(|n| t.label(n).as_str()).collect();
        assert_eq!(labels, ["V!x", "+", "V!y", "N!2", "V!z"]);
        assert_eq!(t.parent(3), Some((0, EdgeLabel::Above)));
        assert_eq!(t.depth(4), 2);
        assert_eq!(t.edges().count(), 4);
    }
}
