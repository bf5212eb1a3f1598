// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

//! Compiles the guide's Rust snippets as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/slt.md")]
pub mod slt {}

#[doc = include_str!("../../../book/src/tuples.md")]
pub mod tuples {}

#[doc = include_str!("../../../book/src/index.md")]
pub mod index {}

#[doc = include_str!("../../../book/src/retrieval.md")]
pub mod retrieval {}

#[doc = include_str!("../../../book/src/reranking.md")]
pub mod reranking {}

#[doc = include_str!("../../../book/src/service.md")]
pub mod service {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}
