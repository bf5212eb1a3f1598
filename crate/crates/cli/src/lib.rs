// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

//! HTTP front end and plain-text rendering for the `tangent` binary.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tangent::engine::DEFAULT_K;
use tangent::service::{DocumentHit, SearchResponse, SearchService, ServiceError, Timing};
use tower_http::services::ServeDir;

/// Which ranking a response leads with.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankBy {
    #[default]
    Formula,
    Doc,
}

/// Response body for `by=doc`: the document ranking without formula groups.
#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DocumentResponse<'a> {
    pub query: &'a str,
    pub timing_ms: Timing,
    pub documents: &'a [DocumentHit],
}

impl<'a> From<&'a SearchResponse> for DocumentResponse<'a> {
    fn from(r: &'a SearchResponse) -> Self {
        DocumentResponse {
            query: &r.query,
            timing_ms: r.timing_ms,
            documents: &r.documents,
        }
    }
}

#[derive(Debug, Deserialize)]
struct SearchParams {
    q: String,
    k: Option<usize>,
    rerank: Option<bool>,
    #[serde(default)]
    by: RankBy,
}

struct ApiError(ServiceError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.0 {
            ServiceError::IndexNotLoaded => StatusCode::SERVICE_UNAVAILABLE,
            ServiceError::Parse(_) | ServiceError::Search(_) => StatusCode::BAD_REQUEST,
        };
        let body = serde_json::json!({ "error": self.0.to_string() });
        (status, Json(body)).into_response()
    }
}

/// `/api/search`, `/api/health` and, if given, static files from `assets`
/// for every other path.
pub fn router(service: Arc<SearchService>, assets: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/search", get(search))
        .route("/api/health", get(health))
        .with_state(service);
    match assets {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

async fn search(
    State(service): State<Arc<SearchService>>,
    Query(p): Query<SearchParams>,
) -> Result<Response, ApiError> {
    let k = p.k.unwrap_or(DEFAULT_K);
    let rerank = p.rerank.unwrap_or(true);
    let response = tokio::task::spawn_blocking(move || service.run_query(&p.q, k, rerank))
        .await
        .expect("search task panicked")
        .map_err(ApiError)?;
    Ok(match p.by {
        RankBy::Formula => Json(response).into_response(),
        RankBy::Doc => Json(DocumentResponse::from(&response)).into_response(),
    })
}

async fn health(State(service): State<Arc<SearchService>>) -> Result<Response, ApiError> {
    Ok(Json(service.health().map_err(ApiError)?).into_response())
}

/// Human-readable listing of a response.
pub fn render_text(r: &SearchResponse, by: RankBy) -> String {
    let mut out = String::new();
    writeln!(out, "query {}", r.query).unwrap();
    match by {
        RankBy::Formula => {
            let mut rank = 0;
            for g in &r.groups {
                if !g.structure_key.is_empty() {
                    writeln!(out, "group {}", g.structure_key).unwrap();
                }
                for h in &g.hits {
                    rank += 1;
                    let triple = h.triple.map(|t| t.to_string()).unwrap_or_else(|| "-".into());
                    let docs: Vec<String> = h.docs.iter().map(|d| format!("{}#{}", d.doc, d.position)).collect();
                    writeln!(
                        out,
                        "{rank:>4}  {triple:<18} dice {:.4}  {}  {}",
                        h.dice_score,
                        h.canonical,
                        docs.join(" ")
                    )
                    .unwrap();
                }
            }
        }
        RankBy::Doc => {
            for (i, d) in r.documents.iter().enumerate() {
                let triple = d.best_triple.map(|t| t.to_string()).unwrap_or_else(|| "-".into());
                writeln!(
                    out,
                    "{:>4}  {triple:<18} dice {:.4}  hits {:<3} {}",
                    i + 1,
                    d.best_dice,
                    d.hit_count,
                    d.doc_name
                )
                .unwrap();
            }
        }
    }
    write!(
        out,
        "core {:.2} ms, rerank {:.2} ms",
        r.timing_ms.core_ms, r.timing_ms.rerank_ms
    )
    .unwrap();
    out
}
