mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use personable_core::fixtures;
use personable_service::http::router;
use personable_service::SessionManager;
use serde_json::{json, Value};
use tempfile::TempDir;
use tower::ServiceExt;

struct Api {
    app: Router,
    _dir: TempDir,
}

impl Api {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let m = SessionManager::open(common::config(&dir)).unwrap();
        Self {
            app: router(Arc::new(m)),
            _dir: dir,
        }
    }

    async fn call(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let req = Request::builder().method(method).uri(uri);
        let req = match body {
            Some(b) => req
                .header("content-type", "application/json")
                .body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
        };
        (status, value)
    }

    async fn get(&self, uri: &str) -> (StatusCode, Value) {
        self.call(Method::GET, uri, None).await
    }

    async fn post(&self, uri: &str, body: Value) -> (StatusCode, Value) {
        self.call(Method::POST, uri, Some(body)).await
    }

    async fn with_sites() -> Self {
        let api = Self::new();
        let (s, _) = api
            .post(
                "/sites",
                json!({ "description": fixtures::CAMERA_SITE, "activities": fixtures::CAMERA_ACTIVITIES }),
            )
            .await;
        assert_eq!(s, StatusCode::CREATED);
        let (s, _) = api.post("/sites", json!({ "description": fixtures::CONGRESS_SITE })).await;
        assert_eq!(s, StatusCode::CREATED);
        let (s, _) = api
            .post(
                "/sites",
                json!({ "description": fixtures::BOOKSTORE_SITE, "theory": fixtures::BOOKSTORE_THEORY }),
            )
            .await;
        assert_eq!(s, StatusCode::CREATED);
        api
    }

    async fn session(&self, site: &str, user: Option<&str>) -> String {
        let (s, v) = self.post("/sessions", json!({ "site": site, "user": user })).await;
        assert_eq!(s, StatusCode::CREATED, "{v}");
        v["session"].as_str().unwrap().to_string()
    }
}

fn anchors(page: &Value) -> Vec<String> {
    page["links"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["variable"].as_str().unwrap().to_string())
        .collect()
}

#[tokio::test]
async fn sites_are_listed_and_analyzed() {
    let api = Api::with_sites().await;
    let (s, v) = api.get("/sites").await;
    assert_eq!(s, StatusCode::OK);
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|x| x["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["bookstore", "camera", "congress"]);

    let (s, v) = api.get("/sites/camera").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["attributes"], json!(["maker", "type"]));

    let (s, v) = api.get("/sites/camera/analysis").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["frozen"]["frozen"], json!(false));
    assert_eq!(v["audience"]["rows"].as_array().unwrap().len(), 5);

    let (s, v) = api.post("/sites", json!({ "description": fixtures::CAMERA_SITE })).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["error"], "site-exists");

    let (s, v) = api.post("/sites", json!({ "description": "not = [toml" })).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(v["message"].is_string());
}

#[tokio::test]
async fn browsing_through_the_api() {
    let api = Api::with_sites().await;
    let id = api.session("camera", None).await;

    let (s, page) = api.get(&format!("/sessions/{id}/page")).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(anchors(&page), ["maker=Canon", "maker=Nikon", "maker=Minolta"]);

    let (s, r) = api
        .post(&format!("/sessions/{id}/out-of-turn"), json!({ "terms": ["SLR", "zoom"] }))
        .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(anchors(&r), ["maker=Nikon", "maker=Minolta"]);
    assert_eq!(r["warnings"].as_array().unwrap().len(), 1);
    assert_eq!(r["no_match"], json!(false));
    assert!(r["eliminated"].as_array().unwrap().contains(&json!("canon")));

    let (s, c) = api.get(&format!("/sessions/{id}/choices?attribute=maker")).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(c["values"], json!(["Nikon", "Minolta"]));

    let (s, v) = api.get(&format!("/sessions/{id}/trace")).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["error"], "not-completed");

    let (s, r) = api
        .post(&format!("/sessions/{id}/click"), json!({ "variable": "maker=Nikon" }))
        .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(r["status"], "completed");
    assert_eq!(r["kind"], "complete");

    let (s, t) = api.get(&format!("/sessions/{id}/trace")).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(t["events"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn errors_carry_kind_and_status() {
    let api = Api::with_sites().await;
    let (s, v) = api.get("/sessions/missing/page").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "unknown-session");

    let (s, v) = api.post("/sessions", json!({ "site": "nowhere" })).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "unknown-site");

    let id = api.session("congress", None).await;
    let (s, v) = api
        .post(&format!("/sessions/{id}/click"), json!({ "variable": "party=D" }))
        .await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"], "no-such-edge");
    assert_eq!(v["detail"]["variable"], "party=D");

    let (s, _) = api
        .post(&format!("/sessions/{id}/out-of-turn"), json!({ "terms": ["Representative"] }))
        .await;
    assert_eq!(s, StatusCode::OK);
    let (s, v) = api
        .post(&format!("/sessions/{id}/out-of-turn"), json!({ "terms": ["Senior seat"] }))
        .await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["error"], "contradiction");
    assert!(!v["detail"]["derivation"].as_array().unwrap().is_empty());

    let (s, v) = api.get(&format!("/sessions/{id}/choices?attribute=colour")).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"], "unknown-attribute");

    let (s, v) = api.post(&format!("/sessions/{id}/resume"), json!({})).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["error"], "not-saved");

    let (s, _) = api.post(&format!("/sessions/{id}/click"), json!({ "wrong": 1 })).await;
    assert!(s.is_client_error());
}

#[tokio::test]
async fn save_resume_and_templates() {
    let api = Api::with_sites().await;
    let id = api.session("bookstore", Some("linus")).await;
    for var in ["category=Science", "title=John Nash"] {
        let (s, _) = api.post(&format!("/sessions/{id}/click"), json!({ "variable": var })).await;
        assert_eq!(s, StatusCode::OK);
    }
    for (slot, value) in [("payment", "Discover"), ("shipping", "Fedex")] {
        let (s, _) = api
            .post(&format!("/sessions/{id}/form"), json!({ "slot": slot, "value": value }))
            .await;
        assert_eq!(s, StatusCode::OK);
    }
    let (s, v) = api.post(&format!("/sessions/{id}/save"), json!({})).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["status"], "saved");
    let (s, v) = api.post(&format!("/sessions/{id}/resume"), json!({})).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["status"], "completed");

    let (s, v) = api.post(&format!("/sessions/{id}/trace"), json!({})).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["remembered"], "remembered-linus");

    let (s, v) = api.get("/sites/bookstore/templates?user=linus").await;
    assert_eq!(s, StatusCode::OK);
    assert!(v.as_array().unwrap().iter().any(|t| t["id"] == "remembered-linus"));
    let (_, v) = api.get("/sites/bookstore/templates?user=ada").await;
    assert!(v.as_array().unwrap().is_empty());

    let (s, v) = api.post("/sites/bookstore/templates", json!({})).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["templates"].as_array().unwrap().last().unwrap()["id"], "vanilla");

    let (s, v) = api
        .post(
            "/sessions",
            json!({ "site": "bookstore", "user": "linus", "template": "remembered-linus" }),
        )
        .await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(v["slots"]["payment"], "Discover");
    let (s, v) = api
        .post(
            "/sessions",
            json!({ "site": "bookstore", "user": "ada", "template": "remembered-linus" }),
        )
        .await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["error"], "scope-mismatch");

    let (s, v) = api.post("/sites/camera/templates", json!({})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"], "no-theory");
}
