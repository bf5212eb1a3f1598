// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

//! Formula search over Symbol Layout Trees.
//!
//! Retrieval is a two-stage cascade:
//!
//! 1. [`engine`] evaluates the symbol-pair [`tuples`] of a query against an
//!    inverted [`index`] and returns the top-k formulae by Dice's coefficient.
//! 2. [`mss`] re-scores those candidates by Maximum Subtree Similarity, a
//!    lexicographic score triple computed over aligned subtrees.
//!
//! [`service`] ties both stages together, groups hits by the structure of the
//! matched query subtree, derives per-node highlight classes and ranks
//! documents.
//!
//! ```
//! use tangent::slt::parse_mathml;
//! use tangent::tuples::{extract_tuples, Window};
//!
//! let slt = parse_mathml("<math><mi>x</mi><mo>+</mo><mi>y</mi></math>").unwrap();
//! assert_eq!(slt.canonical_string(), "[V!x[n:+[n:V!y]]]");
//!
//! let bag = extract_tuples(&slt, Window::bounded(1), false);
//! assert_eq!(bag.total(), 2);
//! ```

pub mod engine;
pub mod index;
pub mod mss;
pub mod service;
pub mod slt;
pub mod synth;
pub mod tuples;
