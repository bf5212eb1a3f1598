// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

use super::{EdgeLabel, NodeId, Slt, SltBuilder, SltError, SymbolLabel};

pub(super) fn write(slt: &Slt) -> String {
    let mut out = String::with_capacity(slt.len() * 8);
    out.push('[');
    write_node(slt, slt.root(), &mut out);
    out.push(']');
    out
}

fn write_node(slt: &Slt, node: NodeId, out: &mut String) {
    for c in slt.label(node).as_str().chars() {
        if matches!(c, '[' | ']' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    for (edge, child) in slt.children(node) {
        out.push('[');
        out.push(edge.as_char());
        out.push(':');
        write_node(slt, child, out);
        out.push(']');
    }
}

pub(super) fn parse(text: &str) -> Result<Slt, SltError> {
    let mut p = Parser { text, pos: 0 };
    p.expect('[', "expected `[`")?;
    let label = p.label()?;
    let mut builder = SltBuilder::new(label)?;
    p.children(&mut builder, 0)?;
    p.expect(']', "expected `]`")?;
    if p.pos != text.len() {
        return Err(p.error("trailing input"));
    }
    Ok(builder.finish())
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, reason: &'static str) -> SltError {
        SltError::Canonical {
            pos: self.pos,
            reason,
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn expect(&mut self, want: char, reason: &'static str) -> Result<(), SltError> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += c.len_utf8();
                Ok(())
            }
            _ => Err(self.error(reason)),
        }
    }

    fn label(&mut self) -> Result<SymbolLabel, SltError> {
        let mut label = String::new();
        while let Some(c) = self.peek() {
            match c {
                '[' | ']' => break,
                '\\' => {
                    self.pos += 1;
                    label.push(self.bump().ok_or_else(|| self.error("dangling escape"))?);
                }
                _ => {
                    label.push(c);
                    self.pos += c.len_utf8();
                }
            }
        }
        if label.is_empty() {
            return Err(self.error("empty label"));
        }
        Ok(SymbolLabel::new(label))
    }

    fn children(&mut self, builder: &mut SltBuilder, parent: NodeId) -> Result<(), SltError> {
        while self.peek() == Some('[') {
            self.pos += 1;
            let edge = self
                .bump()
                .and_then(EdgeLabel::from_char)
                .ok_or_else(|| self.error("unknown edge label"))?;
            self.expect(':', "expected `:` after edge label")?;
            let label = self.label()?;
            let child = builder.add_child(parent, edge, label)?;
            self.children(builder, child)?;
            self.expect(']', "expected `]`")?;
        }
        Ok(())
    }
}
