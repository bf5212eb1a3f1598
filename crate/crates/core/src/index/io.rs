// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

//! Binary index file.
//!
//! ```text
//! header   "TGNT"  version:u32le  window:u32le (0 = unbounded)  eol:u8
//! D2       n, n × string
//! D3       n, n × string (tuple key)
//! D1       n, n × string (canonical SLT)
//! A1       |D1| × varint
//! PL1      per tuple:   len, len × (formula delta, count)
//! PL2      per formula: len, len × (document delta, position)
//! D4       n, n × (open end: 0 ancestor / 1 descendant, string label, string path)
//! PL3      per pattern: len, len × tuple delta
//! trailer  crc32 of everything above, u32le
//! ```
//!
//! Integers outside the header are unsigned LEB128 varints; strings are a
//! varint byte length followed by UTF-8. Deltas are taken from the previous
//! entry of the same list (the first entry is absolute).

use std::fs;
use std::io::Read;
use std::path::Path;

use super::{DocRef, Index, IndexError, IndexParams, Parts, Posting};
use crate::slt::{EdgeLabel, SymbolLabel};
use crate::tuples::{Tuple, WildcardEnd, WildcardPattern, Window};

pub const MAGIC: &[u8; 4] = b"TGNT";
pub const FORMAT_VERSION: u32 = 1;

const HEADER_LEN: usize = 13;

pub fn save(index: &Index, path: &Path) -> Result<(), IndexError> {
    fs::write(path, to_bytes(index))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Index, IndexError> {
    from_bytes(&fs::read(path)?)
}

impl Index {
    pub fn to_bytes(&self) -> Vec<u8> {
        to_bytes(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Index, IndexError> {
        from_bytes(bytes)
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn uint(&mut self, v: u64) {
        leb128::write::unsigned(&mut self.0, v).expect("writing to a Vec cannot fail");
    }

    fn str(&mut self, s: &str) {
        self.uint(s.len() as u64);
        self.0.extend_from_slice(s.as_bytes());
    }

    fn strings<'a>(&mut self, items: impl ExactSizeIterator<Item = &'a str>) {
        self.uint(items.len() as u64);
        for s in items {
            self.str(s);
        }
    }
}

fn to_bytes(index: &Index) -> Vec<u8> {
    let params = index.params;
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.0.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    w.0.extend_from_slice(&params.window.to_u32().to_le_bytes());
    w.0.push(u8::from(params.eol));

    w.strings(index.documents.iter().map(String::as_str));
    let keys: Vec<String> = index.tuples.iter().map(Tuple::key).collect();
    w.strings(keys.iter().map(String::as_str));
    w.strings(index.formulas.iter().map(String::as_str));
    for &size in &index.sizes {
        w.uint(u64::from(size));
    }
    for list in &index.postings {
        w.uint(list.len() as u64);
        let mut prev = 0;
        for p in list {
            w.uint(u64::from(p.formula - prev));
            w.uint(u64::from(p.count));
            prev = p.formula;
        }
    }
    for list in &index.occurrences {
        w.uint(list.len() as u64);
        let mut prev = 0;
        for r in list {
            w.uint(u64::from(r.doc - prev));
            w.uint(u64::from(r.position));
            prev = r.doc;
        }
    }
    w.uint(index.patterns.len() as u64);
    for p in &index.patterns {
        w.uint(match p.open_end {
            WildcardEnd::Ancestor => 0,
            WildcardEnd::Descendant => 1,
        });
        w.str(p.fixed.as_str());
        let path: String = p.path.iter().map(|e| e.as_char()).collect();
        w.str(&path);
    }
    for list in &index.expansions {
        w.uint(list.len() as u64);
        let mut prev = 0;
        for &t in list {
            w.uint(u64::from(t - prev));
            prev = t;
        }
    }
    let crc = crc32fast::hash(&w.0);
    w.0.extend_from_slice(&crc.to_le_bytes());
    w.0
}

struct Reader<'a> {
    rest: &'a [u8],
}

fn corrupt(what: impl Into<String>) -> IndexError {
    IndexError::Corrupt(what.into())
}

impl Reader<'_> {
    fn uint(&mut self) -> Result<u64, IndexError> {
        leb128::read::unsigned(&mut self.rest).map_err(|e| corrupt(format!("bad varint: {e}")))
    }

    fn u32(&mut self) -> Result<u32, IndexError> {
        u32::try_from(self.uint()?).map_err(|_| corrupt("integer out of range"))
    }

    /// A length that must be coverable by the remaining bytes.
    fn len(&mut self) -> Result<usize, IndexError> {
        let n = self.uint()? as usize;
        if n > self.rest.len() {
            return Err(corrupt("length exceeds file size"));
        }
        Ok(n)
    }

    fn str(&mut self) -> Result<String, IndexError> {
        let n = self.len()?;
        let mut buf = vec![0; n];
        self.rest
            .read_exact(&mut buf)
            .map_err(|_| corrupt("truncated string"))?;
        String::from_utf8(buf).map_err(|_| corrupt("invalid UTF-8"))
    }

    fn strings(&mut self) -> Result<Vec<String>, IndexError> {
        let n = self.len()?;
        (0..n).map(|_| self.str()).collect()
    }

    fn delta_list<T>(
        &mut self,
        mut item: impl FnMut(&mut Self, u32) -> Result<T, IndexError>,
    ) -> Result<Vec<T>, IndexError> {
        let n = self.len()?;
        let mut out = Vec::with_capacity(n);
        let mut prev = 0u32;
        for i in 0..n {
            let delta = self.u32()?;
            if i > 0 && delta == 0 {
                return Err(corrupt("list not strictly increasing"));
            }
            prev = prev
                .checked_add(delta)
                .ok_or_else(|| corrupt("id overflow"))?;
            out.push(item(self, prev)?);
        }
        Ok(out)
    }
}

fn from_bytes(bytes: &[u8]) -> Result<Index, IndexError> {
    if bytes.len() < HEADER_LEN + 4 || &bytes[..4] != MAGIC {
        return Err(IndexError::FormatVersionMismatch);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(IndexError::FormatVersionMismatch);
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(trailer.try_into().expect("4 bytes"));
    if crc32fast::hash(body) != stored {
        return Err(IndexError::ChecksumMismatch);
    }
    let window = Window::from_u32(u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")));
    let eol = match bytes[12] {
        0 => false,
        1 => true,
        _ => return Err(corrupt("bad eol flag")),
    };
    let mut r = Reader {
        rest: &body[HEADER_LEN..],
    };

    let documents = r.strings()?;
    let tuples = r
        .strings()?
        .iter()
        .map(|k| Tuple::from_key(k).ok_or_else(|| corrupt(format!("bad tuple key {k:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let formulas = r.strings()?;
    let sizes = (0..formulas.len())
        .map(|_| r.u32())
        .collect::<Result<Vec<_>, _>>()?;
    let postings = (0..tuples.len())
        .map(|_| {
            r.delta_list(|r, formula| {
                Ok(Posting {
                    formula,
                    count: r.u32()?,
                })
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let occurrences = (0..formulas.len())
        .map(|_| {
            r.delta_list(|r, doc| {
                Ok(DocRef {
                    doc,
                    position: r.u32()?,
                })
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let pattern_count = r.len()?;
    let mut patterns = Vec::with_capacity(pattern_count);
    for _ in 0..pattern_count {
        let open_end = match r.uint()? {
            0 => WildcardEnd::Ancestor,
            1 => WildcardEnd::Descendant,
            _ => return Err(corrupt("bad wildcard side")),
        };
        let fixed = SymbolLabel::new(r.str()?);
        let path = r
            .str()?
            .chars()
            .map(EdgeLabel::from_char)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| corrupt("bad edge label in pattern"))?;
        patterns.push(WildcardPattern {
            open_end,
            fixed,
            path,
        });
    }
    let expansions = (0..pattern_count)
        .map(|_| r.delta_list(|_, t| Ok(t)))
        .collect::<Result<Vec<_>, _>>()?;
    if !r.rest.is_empty() {
        return Err(corrupt("trailing bytes"));
    }

    let index = Index::from_parts(
        IndexParams { window, eol },
        Parts {
            formulas,
            documents,
            tuples,
            patterns,
            postings,
            occurrences,
            expansions,
            sizes,
        },
    );
    index.check_invariants().map_err(IndexError::Corrupt)?;
    Ok(index)
}
