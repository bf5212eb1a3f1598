// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

//! Corpus readers: JSON lines and directories of (X)HTML pages.

use std::fs;
use std::io::{self, BufRead};
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

/// One document and the formulae extracted from it, in document order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub doc: String,
    pub formulae: Vec<FormulaRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaRecord {
    /// Formula ordinal within the document.
    pub pos: u32,
    pub mathml: String,
}

/// Iterator over a JSON-lines corpus, one [`CorpusRecord`] per line. Blank
/// lines are skipped; undecodable lines yield `Err((line number, message))`.
pub struct JsonlRecords<R> {
    lines: io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> JsonlRecords<R> {
    pub fn new(reader: R) -> Self {
        JsonlRecords {
            lines: reader.lines(),
            line_no: 0,
        }
    }
}

impl<R: BufRead> Iterator for JsonlRecords<R> {
    type Item = Result<CorpusRecord, (usize, String)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.line_no += 1;
            let line = match line {
                Ok(line) => line,
                Err(e) => return Some(Err((self.line_no, e.to_string()))),
            };
            if line.trim().is_empty() {
                continue;
            }
            return Some(serde_json::from_str(&line).map_err(|e| (self.line_no, e.to_string())));
        }
    }
}

/// Read every `.html`, `.xhtml` and `.htm` file below `dir` (sorted by
/// path) and extract its `<math>` elements in document order. Documents are
/// named by their path relative to `dir`; positions are occurrence ordinals.
pub fn read_html_dir(dir: &Path) -> io::Result<Vec<CorpusRecord>> {
    static MATH: OnceLock<Regex> = OnceLock::new();
    let math = MATH.get_or_init(|| {
        Regex::new(r"(?s)<(?:[A-Za-z_][\w.\-]*:)?math\b.*?</(?:[A-Za-z_][\w.\-]*:)?math\s*>")
            .expect("valid regex")
    });
    let mut records = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(io::Error::other)?;
        let path = entry.path();
        let is_html = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "html" | "xhtml" | "htm"));
        if !entry.file_type().is_file() || !is_html {
            continue;
        }
        let text = fs::read_to_string(path)?;
        let doc = path
            .strip_prefix(dir)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/");
        let formulae = math
            .find_iter(&text)
            .enumerate()
            .map(|(i, m)| FormulaRecord {
                pos: i as u32,
                mathml: m.as_str().to_owned(),
            })
            .collect();
        records.push(CorpusRecord { doc, formulae });
    }
    Ok(records)
}
