// Copyright 2026 The tangent authors
// SPDX-License-Identifier: Apache-2.0

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tangent::index::{build_index, CorpusRecord, FormulaRecord, IndexParams};
use tangent::service::SearchService;
use tangent::tuples::Window;
use tangent_cli::router;
use tower::ServiceExt;

const X_PLUS_Y: &str = "<math><mi>x</mi><mo>+</mo><mi>y</mi></math>";

fn service() -> SearchService {
    let record = |doc: &str, formulae: &[&str]| CorpusRecord {
        doc: doc.into(),
        formulae: formulae
            .iter()
            .enumerate()
            .map(|(i, m)| FormulaRecord {
                pos: i as u32,
                mathml: (*m).into(),
            })
            .collect(),
    };
    let corpus = vec![
        record("a.html", &[X_PLUS_Y, "<math><msup><mi>x</mi><mn>2</mn></msup></math>"]),
        record("b.html", &["<math><mi>x</mi><mo>+</mo><mi>z</mi></math>"]),
    ];
    let (index, _) = build_index(corpus, IndexParams::new(Window::bounded(2), true)).unwrap();
    SearchService::new(index)
}

fn encode(s: &str) -> String {
    s.bytes()
        .map(|b| match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' => (b as char).to_string(),
            _ => format!("%{b:02X}"),
        })
        .collect()
}

async fn get(app: Router, uri: &str) -> (StatusCode, Vec<u8>) {
    let res = app
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn get_json(app: Router, uri: &str) -> (StatusCode, Value) {
    let (status, body) = get(app, uri).await;
    (status, serde_json::from_slice(&body).unwrap())
}

#[tokio::test]
async fn health_reports_index_params() {
    let app = router(Arc::new(service()), None);
    let (status, body) = get_json(app, "/api/health").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        body,
        serde_json::json!({"status": "ok", "formulae": 3, "w": 2, "eol": true})
    );
}

#[tokio::test]
async fn search_returns_camel_case_response() {
    let app = router(Arc::new(service()), None);
    let uri = format!("/api/search?q={}&k=10", encode(X_PLUS_Y));
    let (status, body) = get_json(app, &uri).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["query"], "[V!x[n:+[n:V!y]]]");
    assert!(body["timingMs"]["coreMs"].is_number());
    assert!(body["timingMs"]["rerankMs"].is_number());
    let top = &body["groups"][0];
    assert!(top["structureKey"].is_string());
    let hit = &top["hits"][0];
    assert_eq!(hit["canonical"], "[V!x[n:+[n:V!y]]]");
    assert_eq!(hit["diceScore"], 1.0);
    assert_eq!(hit["triple"]["negUnmatched"], 0);
    assert_eq!(hit["triple"]["exact"], 3);
    assert_eq!(hit["highlight"], serde_json::json!(["exact", "exact", "exact"]));
    assert_eq!(hit["docs"], serde_json::json!([{"doc": "a.html", "position": 0}]));
    assert_eq!(body["documents"][0]["docName"], "a.html");
    assert_eq!(body["documents"][0]["hitCount"], 1);
}

#[tokio::test]
async fn search_without_rerank_and_by_document() {
    let app = router(Arc::new(service()), None);
    let uri = format!("/api/search?q={}&rerank=false", encode(X_PLUS_Y));
    let (status, body) = get_json(app.clone(), &uri).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body["groups"][0]["hits"][0]["triple"].is_null());

    let uri = format!("/api/search?q={}&by=doc", encode(X_PLUS_Y));
    let (status, body) = get_json(app, &uri).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body.get("groups").is_none());
    let docs: Vec<&str> = body["documents"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["docName"].as_str().unwrap())
        .collect();
    assert_eq!(docs, ["a.html", "b.html"]);
}

#[tokio::test]
async fn errors_map_to_status_codes() {
    let app = router(Arc::new(service()), None);
    let (status, body) = get_json(app.clone(), &format!("/api/search?q={}", encode("<math><mi>x"))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].is_string());
    let (status, _) = get_json(app.clone(), &format!("/api/search?q={}&k=0", encode(X_PLUS_Y))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = get(app.clone(), "/api/search").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = get(app, &format!("/api/search?q={}&by=page", encode(X_PLUS_Y))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let empty = router(Arc::new(SearchService::without_index()), None);
    let (status, _) = get_json(empty.clone(), &format!("/api/search?q={}", encode(X_PLUS_Y))).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    let (status, _) = get_json(empty, "/api/health").await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
}

#[tokio::test]
async fn static_files_are_served() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html>ui</html>").unwrap();
    std::fs::write(dir.path().join("app.js"), "console.log(1)").unwrap();
    let app = router(Arc::new(service()), Some(dir.path()));
    assert_eq!(get(app.clone(), "/").await, (StatusCode::OK, b"<html>ui</html>".to_vec()));
    assert_eq!(get(app.clone(), "/app.js").await, (StatusCode::OK, b"console.log(1)".to_vec()));
    assert_eq!(get(app.clone(), "/missing.css").await.0, StatusCode::NOT_FOUND);
    assert_eq!(get_json(app, "/api/health").await.0, StatusCode::OK);
}

#[tokio::test]
async fn identical_requests_give_identical_results() {
    let app = router(Arc::new(service()), None);
    let uri = format!("/api/search?q={}", encode("<math><mi>x</mi><mo>+</mo><mi>?a</mi></math>"));
    let (_, mut a) = get_json(app.clone(), &uri).await;
    let (_, mut b) = get_json(app, &uri).await;
    a.as_object_mut().unwrap().remove("timingMs");
    b.as_object_mut().unwrap().remove("timingMs");
    assert_eq!(a, b);
}
