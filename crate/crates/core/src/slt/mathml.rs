// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent conversion of Presentation MathML into SLTs.
//!
//! The converter first turns every layout element into a *line*: the symbols
//! that sit on one baseline, each carrying the lines attached to it (scripts,
//! numerator and denominator, matrix cells, ...). Consecutive symbols of a
//! line are joined by `next` edges when the line is emitted as a tree.

use std::borrow::Cow;
use std::sync::OnceLock;

use regex::Regex;
use roxmltree::{Document, Node};
use thiserror::Error;

use super::{EdgeLabel, NodeId, Slt, SltBuilder, SymbolLabel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed MathML: {0}")]
    MalformedInput(String),
    #[error("unsupported MathML element <{0}>")]
    UnsupportedElement(String),
    #[error("formula has no symbols after normalization")]
    EmptyFormula,
}

type Result<T> = std::result::Result<T, ParseError>;

/// Parse a Presentation MathML fragment into an SLT.
///
/// Namespaces and prefixes are ignored, invisible operators and whitespace
/// are dropped, parenthesized groups and function argument lists become
/// `M!` nodes.
///
/// ```
/// use tangent::slt::parse_mathml;
///
/// let t = parse_mathml("<mfrac><mi>a</mi><mi>b</mi></mfrac>").unwrap();
/// assert_eq!(t.canonical_string(), "[F![a:V!a][b:V!b]]");
/// ```
pub fn parse_mathml(text: &str) -> Result<Slt> {
    let prepared = replace_entities(text);
    let stripped;
    let doc = match Document::parse(&prepared) {
        Ok(doc) => doc,
        Err(first) => {
            stripped = strip_prefixes(&prepared);
            Document::parse(&stripped)
                .map_err(|_| ParseError::MalformedInput(first.to_string()))?
        }
    };
    let root = doc.root_element();
    let line = Converter.line(std::iter::once(root))?;
    build_tree(line)
}

#[derive(Debug)]
struct Sym {
    label: SymbolLabel,
    attached: Vec<(EdgeLabel, Line)>,
}

type Line = Vec<Sym>;

impl Sym {
    fn new(label: SymbolLabel) -> Self {
        Sym {
            label,
            attached: Vec::new(),
        }
    }

    /// Attach `line` under `edge`; a second line for the same edge continues
    /// the first one on its baseline.
    fn attach(&mut self, edge: EdgeLabel, line: Line) {
        if line.is_empty() {
            return;
        }
        match self.attached.iter_mut().find(|(e, _)| *e == edge) {
            Some((_, existing)) => existing.extend(line),
            None => self.attached.push((edge, line)),
        }
    }
}

fn build_tree(line: Line) -> Result<Slt> {
    let mut syms = line.into_iter();
    let root = syms.next().ok_or(ParseError::EmptyFormula)?;
    let mut builder = SltBuilder::new(root.label).map_err(malformed)?;
    for (edge, attached) in root.attached {
        emit_line(&mut builder, 0, edge, attached)?;
    }
    emit_line(&mut builder, 0, EdgeLabel::Next, syms.collect())?;
    Ok(builder.finish())
}

fn emit_line(b: &mut SltBuilder, parent: NodeId, edge: EdgeLabel, line: Line) -> Result<()> {
    let mut prev: Option<NodeId> = None;
    for sym in line {
        let id = match prev {
            None => b.add_child(parent, edge, sym.label),
            Some(p) => b.add_child(p, EdgeLabel::Next, sym.label),
        }
        .map_err(malformed)?;
        for (e, attached) in sym.attached {
            emit_line(b, id, e, attached)?;
        }
        prev = Some(id);
    }
    Ok(())
}

fn malformed(e: impl ToString) -> ParseError {
    ParseError::MalformedInput(e.to_string())
}

/// A row element after fence matching.
enum Piece<'a, 'input: 'a> {
    Elem(Node<'a, 'input>),
    Fenced {
        open: String,
        close: String,
        inner: Vec<Piece<'a, 'input>>,
    },
}

enum Fence {
    Open,
    Close,
    Either,
}

fn fence_kind(text: &str) -> Option<Fence> {
    match text {
        "(" | "[" | "{" => Some(Fence::Open),
        ")" | "]" | "}" => Some(Fence::Close),
        "|" => Some(Fence::Either),
        _ => None,
    }
}

fn fence_of(node: Node) -> Option<(String, Fence)> {
    if node.tag_name().name() != "mo" {
        return None;
    }
    let text = token_text(node);
    let text = text.trim();
    fence_kind(text).map(|k| (text.to_owned(), k))
}

/// Match fence operators inside one row. Unbalanced openers fall back to
/// plain operators.
fn group_fences<'a, 'i: 'a>(flat: Vec<Node<'a, 'i>>) -> Vec<Piece<'a, 'i>> {
    struct Open<'a, 'i: 'a> {
        mo: Node<'a, 'i>,
        text: String,
        inner: Vec<Piece<'a, 'i>>,
    }
    let mut out = Vec::new();
    let mut stack: Vec<Open> = Vec::new();
    for node in flat {
        let Some((text, kind)) = fence_of(node) else {
            match stack.last_mut() {
                Some(top) => top.inner.push(Piece::Elem(node)),
                None => out.push(Piece::Elem(node)),
            }
            continue;
        };
        let closes = match kind {
            Fence::Open => false,
            Fence::Close => !stack.is_empty(),
            Fence::Either => stack.last().is_some_and(|top| top.text == "|"),
        };
        if closes {
            let open = stack.pop().expect("checked non-empty");
            let piece = Piece::Fenced {
                open: open.text,
                close: text,
                inner: open.inner,
            };
            match stack.last_mut() {
                Some(top) => top.inner.push(piece),
                None => out.push(piece),
            }
        } else if matches!(kind, Fence::Close) {
            out.push(Piece::Elem(node));
        } else {
            stack.push(Open {
                mo: node,
                text,
                inner: Vec::new(),
            });
        }
    }
    while let Some(open) = stack.pop() {
        let target = match stack.last_mut() {
            Some(top) => &mut top.inner,
            None => &mut out,
        };
        target.push(Piece::Elem(open.mo));
        target.extend(open.inner);
    }
    out
}

/// Elements whose children simply continue the surrounding baseline.
fn is_row_like(name: &str) -> bool {
    matches!(
        name,
        "math" | "mrow" | "mstyle" | "mpadded" | "merror" | "menclose" | "semantics" | "mtr"
            | "mtd" | "mlabeledtr"
    )
}

/// Elements that contribute nothing to the layout tree.
fn is_dropped(name: &str) -> bool {
    matches!(
        name,
        "mspace"
            | "mphantom"
            | "annotation"
            | "annotation-xml"
            | "none"
            | "mprescripts"
            | "maligngroup"
            | "malignmark"
    )
}

fn element_children<'a, 'i: 'a>(node: Node<'a, 'i>) -> impl Iterator<Item = Node<'a, 'i>> {
    node.children().filter(Node::is_element)
}

fn token_text(node: Node) -> String {
    node.descendants()
        .filter(Node::is_text)
        .filter_map(|n| n.text())
        .collect()
}

fn is_invisible(c: char) -> bool {
    c.is_whitespace()
        || matches!(c, '\u{2061}'..='\u{2064}' | '\u{200B}'..='\u{200D}' | '\u{FEFF}' | '\u{00AD}')
}

fn zero_thickness(node: Node) -> bool {
    node.attribute("linethickness").is_some_and(|t| {
        let digits = t.trim().trim_end_matches(|c: char| c.is_ascii_alphabetic());
        digits.parse::<f64>().is_ok_and(|v| v == 0.0)
    })
}

fn is_table_like(node: Node) -> bool {
    match node.tag_name().name() {
        "mtable" => true,
        "mfrac" => zero_thickness(node),
        _ => false,
    }
}

struct Table {
    rows: usize,
    cols: usize,
    cells: Vec<Line>,
}

struct Converter;

impl Converter {
    fn flatten<'a, 'i: 'a>(&self, nodes: impl Iterator<Item = Node<'a, 'i>>, out: &mut Vec<Node<'a, 'i>>) {
        for node in nodes.filter(Node::is_element) {
            let name = node.tag_name().name();
            if is_dropped(name) {
                continue;
            }
            if name == "maction" {
                self.flatten(element_children(node).take(1), out);
            } else if is_row_like(name) {
                self.flatten(node.children(), out);
            } else {
                out.push(node);
            }
        }
    }

    fn line<'a, 'i: 'a>(&self, nodes: impl Iterator<Item = Node<'a, 'i>>) -> Result<Line> {
        let mut flat = Vec::new();
        self.flatten(nodes, &mut flat);
        let mut line = Vec::new();
        for piece in group_fences(flat) {
            line.extend(self.piece(piece)?);
        }
        Ok(line)
    }

    fn piece(&self, piece: Piece) -> Result<Line> {
        match piece {
            Piece::Elem(node) => self.item(node),
            Piece::Fenced { open, close, inner } => {
                let fences = format!("{open}{close}");
                if let [Piece::Elem(only)] = inner.as_slice() {
                    if is_table_like(*only) {
                        let table = self.table(*only)?;
                        return Ok(vec![matrix_sym(&fences, table)]);
                    }
                }
                let mut cells: Vec<Line> = vec![Vec::new()];
                for p in inner {
                    let is_comma = matches!(&p, Piece::Elem(n)
                        if n.tag_name().name() == "mo" && token_text(*n).trim() == ",");
                    if is_comma {
                        cells.push(Vec::new());
                    } else {
                        cells.last_mut().expect("non-empty").extend(self.piece(p)?);
                    }
                }
                let table = Table {
                    rows: 1,
                    cols: cells.len(),
                    cells,
                };
                Ok(vec![matrix_sym(&fences, table)])
            }
        }
    }

    fn item(&self, node: Node) -> Result<Line> {
        let name = node.tag_name().name();
        let children: Vec<Node> = element_children(node).collect();
        let arity = |n: usize| -> Result<()> {
            if children.len() == n {
                Ok(())
            } else {
                Err(ParseError::MalformedInput(format!(
                    "<{name}> expects {n} children, found {}",
                    children.len()
                )))
            }
        };
        let sym = match name {
            "mi" => {
                let text = token_text(node);
                let text = text.trim();
                if text.is_empty() {
                    return Ok(Vec::new());
                }
                match text.strip_prefix('?') {
                    Some(var) if !var.is_empty() => SymbolLabel::wildcard(var),
                    _ => SymbolLabel::variable(text),
                }
            }
            "mn" => {
                let text: String = token_text(node).split_whitespace().collect();
                if text.is_empty() {
                    return Ok(Vec::new());
                }
                SymbolLabel::number(&text)
            }
            "mo" => {
                let text: String = token_text(node).chars().filter(|c| !is_invisible(*c)).collect();
                if text.is_empty() {
                    return Ok(Vec::new());
                }
                SymbolLabel::new(text)
            }
            "mtext" | "ms" => {
                let words: Vec<String> = token_text(node).split_whitespace().map(str::to_owned).collect();
                if words.is_empty() {
                    return Ok(Vec::new());
                }
                SymbolLabel::text(&words.join("-"))
            }
            "qvar" => {
                let name = node
                    .attribute("name")
                    .map(str::to_owned)
                    .unwrap_or_else(|| token_text(node).trim().to_owned());
                let name = name.trim_start_matches('?');
                if name.is_empty() {
                    return Err(ParseError::MalformedInput("unnamed query variable".into()));
                }
                SymbolLabel::wildcard(name)
            }
            "mfrac" => {
                arity(2)?;
                if zero_thickness(node) {
                    return Ok(vec![matrix_sym("", self.table(node)?)]);
                }
                let mut sym = Sym::new(SymbolLabel::fraction());
                sym.attach(EdgeLabel::Above, self.line(std::iter::once(children[0]))?);
                sym.attach(EdgeLabel::Below, self.line(std::iter::once(children[1]))?);
                return Ok(vec![sym]);
            }
            "msqrt" => {
                let mut sym = Sym::new(SymbolLabel::radical());
                sym.attach(EdgeLabel::Within, self.line(node.children())?);
                return Ok(vec![sym]);
            }
            "mroot" => {
                arity(2)?;
                let mut sym = Sym::new(SymbolLabel::radical());
                sym.attach(EdgeLabel::Above, self.line(std::iter::once(children[1]))?);
                sym.attach(EdgeLabel::Within, self.line(std::iter::once(children[0]))?);
                return Ok(vec![sym]);
            }
            "msub" | "munder" => {
                arity(2)?;
                return self.scripted(children[0], &[(EdgeLabel::Below, Some(children[1]))]);
            }
            "msup" | "mover" => {
                arity(2)?;
                return self.scripted(children[0], &[(EdgeLabel::Above, Some(children[1]))]);
            }
            "msubsup" | "munderover" => {
                arity(3)?;
                return self.scripted(
                    children[0],
                    &[
                        (EdgeLabel::Below, Some(children[1])),
                        (EdgeLabel::Above, Some(children[2])),
                    ],
                );
            }
            "mmultiscripts" => return self.multiscripts(&children),
            "mtable" => {
                let table = self.table(node)?;
                if table.cells.is_empty() {
                    return Ok(Vec::new());
                }
                return Ok(vec![matrix_sym("", table)]);
            }
            "mfenced" => return self.mfenced(node, &children),
            other => return Err(ParseError::UnsupportedElement(other.to_owned())),
        };
        Ok(vec![Sym::new(sym)])
    }

    fn scripted(&self, base: Node, scripts: &[(EdgeLabel, Option<Node>)]) -> Result<Line> {
        let mut line = self.line(std::iter::once(base))?;
        let mut attached = Vec::new();
        for (edge, script) in scripts {
            if let Some(script) = script {
                attached.push((*edge, self.line(std::iter::once(*script))?));
            }
        }
        match line.last_mut() {
            Some(last) => {
                for (edge, script) in attached {
                    last.attach(edge, script);
                }
            }
            // scripts without a base are laid out inline
            None => line.extend(attached.into_iter().flat_map(|(_, l)| l)),
        }
        Ok(line)
    }

    fn multiscripts(&self, children: &[Node]) -> Result<Line> {
        let (base, rest) = children
            .split_first()
            .ok_or_else(|| ParseError::MalformedInput("<mmultiscripts> without base".into()))?;
        let split = rest.iter().position(|n| n.tag_name().name() == "mprescripts");
        let (post, pre) = match split {
            Some(i) => (&rest[..i], &rest[i + 1..]),
            None => (rest, &rest[..0]),
        };
        let mut scripts = Vec::new();
        for (pairs, below, above) in [
            (post, EdgeLabel::Below, EdgeLabel::Above),
            (pre, EdgeLabel::PreBelow, EdgeLabel::PreAbove),
        ] {
            for pair in pairs.chunks(2) {
                scripts.push((below, Some(pair[0])));
                scripts.push((above, pair.get(1).copied()));
            }
        }
        self.scripted(*base, &scripts)
    }

    fn mfenced(&self, node: Node, children: &[Node]) -> Result<Line> {
        let open = node.attribute("open").unwrap_or("(").trim();
        let close = node.attribute("close").unwrap_or(")").trim();
        let fences = format!("{open}{close}");
        if let [only] = children {
            if is_table_like(*only) {
                return Ok(vec![matrix_sym(&fences, self.table(*only)?)]);
            }
        }
        let mut cells = Vec::with_capacity(children.len().max(1));
        for child in children {
            cells.push(self.line(std::iter::once(*child))?);
        }
        if cells.is_empty() {
            cells.push(Vec::new());
        }
        let table = Table {
            rows: 1,
            cols: cells.len(),
            cells,
        };
        Ok(vec![matrix_sym(&fences, table)])
    }

    fn table(&self, node: Node) -> Result<Table> {
        if node.tag_name().name() == "mfrac" {
            let children: Vec<Node> = element_children(node).collect();
            return Ok(Table {
                rows: 2,
                cols: 1,
                cells: vec![
                    self.line(std::iter::once(children[0]))?,
                    self.line(std::iter::once(children[1]))?,
                ],
            });
        }
        let mut rows: Vec<Vec<Line>> = Vec::new();
        for row in element_children(node) {
            let mut cells = Vec::new();
            match row.tag_name().name() {
                "mtr" => {
                    for cell in element_children(row) {
                        cells.push(self.line(cell.children())?);
                    }
                }
                "mlabeledtr" => {
                    for cell in element_children(row).skip(1) {
                        cells.push(self.line(cell.children())?);
                    }
                }
                _ => cells.push(self.line(std::iter::once(row))?),
            }
            rows.push(cells);
        }
        let cols = rows.iter().map(Vec::len).max().unwrap_or(0).max(1);
        let row_count = rows.len();
        let mut cells = Vec::with_capacity(row_count * cols);
        for mut row in rows {
            row.resize_with(cols, Vec::new);
            cells.extend(row);
        }
        Ok(Table {
            rows: row_count,
            cols,
            cells,
        })
    }
}

/// `M!` node whose cells hang off a `within` edge to the first non-empty
/// cell and are chained by `element` edges in row-major order. Padding
/// cells of ragged tables have no node and are skipped by the chain.
fn matrix_sym(fences: &str, table: Table) -> Sym {
    let mut sym = Sym::new(SymbolLabel::matrix(fences, table.rows.max(1), table.cols));
    let mut chain: Option<Line> = None;
    for mut cell in table.cells.into_iter().rev() {
        if cell.is_empty() {
            continue;
        }
        if let Some(next) = chain.take() {
            cell[0].attach(EdgeLabel::Element, next);
        }
        chain = Some(cell);
    }
    if let Some(first) = chain {
        sym.attach(EdgeLabel::Within, first);
    }
    sym
}

const ENTITIES: &[(&str, &str)] = &[
    ("InvisibleTimes", "\u{2062}"),
    ("it", "\u{2062}"),
    ("ApplyFunction", "\u{2061}"),
    ("af", "\u{2061}"),
    ("InvisibleComma", "\u{2063}"),
    ("ic", "\u{2063}"),
    ("nbsp", "\u{a0}"),
    ("ThinSpace", "\u{2009}"),
    ("thinsp", "\u{2009}"),
    ("MediumSpace", "\u{205f}"),
    ("ThickSpace", "\u{2005}"),
    ("NegativeThinSpace", "\u{200b}"),
    ("times", "×"),
    ("minus", "−"),
    ("pm", "±"),
    ("PlusMinus", "±"),
    ("mp", "∓"),
    ("le", "≤"),
    ("leq", "≤"),
    ("ge", "≥"),
    ("geq", "≥"),
    ("ne", "≠"),
    ("equiv", "≡"),
    ("approx", "≈"),
    ("infin", "∞"),
    ("sum", "∑"),
    ("prod", "∏"),
    ("int", "∫"),
    ("sdot", "⋅"),
    ("middot", "·"),
    ("prime", "′"),
    ("rarr", "→"),
    ("larr", "←"),
    ("lang", "⟨"),
    ("rang", "⟩"),
    ("partial", "∂"),
    ("nabla", "∇"),
    ("isin", "∈"),
    ("sub", "⊂"),
    ("cup", "∪"),
    ("cap", "∩"),
    ("forall", "∀"),
    ("exist", "∃"),
    ("alpha", "α"),
    ("beta", "β"),
    ("gamma", "γ"),
    ("delta", "δ"),
    ("epsilon", "ε"),
    ("zeta", "ζ"),
    ("eta", "η"),
    ("theta", "θ"),
    ("iota", "ι"),
    ("kappa", "κ"),
    ("lambda", "λ"),
    ("mu", "μ"),
    ("nu", "ν"),
    ("xi", "ξ"),
    ("pi", "π"),
    ("rho", "ρ"),
    ("sigma", "σ"),
    ("tau", "τ"),
    ("upsilon", "υ"),
    ("phi", "φ"),
    ("chi", "χ"),
    ("psi", "ψ"),
    ("omega", "ω"),
    ("Gamma", "Γ"),
    ("Delta", "Δ"),
    ("Theta", "Θ"),
    ("Lambda", "Λ"),
    ("Pi", "Π"),
    ("Sigma", "Σ"),
    ("Phi", "Φ"),
    ("Psi", "Ψ"),
    ("Omega", "Ω"),
];

fn replace_entities(text: &str) -> Cow<'_, str> {
    if !text.contains('&') {
        return Cow::Borrowed(text);
    }
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"&([A-Za-z][A-Za-z0-9]*);").expect("valid regex"));
    re.replace_all(text, |caps: &regex::Captures| {
        let name = &caps[1];
        ENTITIES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| (*v).to_owned())
            .unwrap_or_else(|| caps[0].to_owned())
    })
}

/// Drop namespace prefixes from element names and prefixed attributes, for
/// fragments cut out of larger documents without their declarations.
fn strip_prefixes(text: &str) -> String {
    static TAGS: OnceLock<Regex> = OnceLock::new();
    static ATTRS: OnceLock<Regex> = OnceLock::new();
    let tags = TAGS.get_or_init(|| Regex::new(r"(</?)[A-Za-z_][\w.\-]*:").expect("valid regex"));
    let attrs = ATTRS.get_or_init(|| {
        Regex::new(r#"\s[A-Za-z_][\w.\-]*:[\w.\-]+\s*=\s*("[^"]*"|'[^']*')"#).expect("valid regex")
    });
    let text = tags.replace_all(text, "$1");
    attrs.replace_all(&text, "").into_owned()
}
