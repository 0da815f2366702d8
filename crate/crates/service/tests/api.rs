use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use dialogue_service::{router, Config, Store};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn interval_example() -> Value {
    json!({
        "alternatives": ["x1", "x2", "x3"],
        "criteria": ["K1", "K2"],
        "structure": {"kind": "interval", "mode": "strict", "matrix": [
            [[4, 6], [4, 6]],
            [[1, 2], [1, 2]],
            [[0, 3], [7, 9]]
        ]}
    })
}

fn relation_example() -> Value {
    json!({
        "alternatives": ["x1", "x2", "x3"],
        "criteria": ["K1", "K2"],
        "structure": {"kind": "relation", "relations": [
            {"criterion": "K1", "pairs": [["x1", "x2"]]},
            {"criterion": "K2", "pairs": [["x2", "x3"]]}
        ]}
    })
}

struct Harness {
    app: Router,
    _dir: tempfile::TempDir,
    store: Arc<Store>,
}

fn harness() -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let (store, skipped) = Store::open(dir.path()).unwrap();
    assert!(skipped.is_empty());
    let store = Arc::new(store);
    Harness {
        app: router(store.clone(), &Config::default()),
        _dir: dir,
        store,
    }
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(match body {
            Some(b) => Body::from(b.to_string()),
            None => Body::empty(),
        })
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

async fn create(app: &Router, problem: Value) -> String {
    let (status, body) = call(app, "POST", "/api/v1/sessions", Some(problem)).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body["session_id"].as_str().unwrap().to_owned()
}

#[tokio::test]
async fn healthz() {
    let h = harness();
    let (status, body) = call(&h.app, "GET", "/healthz", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({"status": "ok"}));
}

#[tokio::test]
async fn create_session_variants() {
    let h = harness();
    let (status, body) = call(&h.app, "POST", "/api/v1/sessions", Some(interval_example())).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["pareto"], json!(["x1", "x3"]));
    assert!(body["suggestions"].as_array().unwrap().len() <= 5);
    assert_eq!(h.store.len(), 1);

    let (status, body) = call(&h.app, "POST", "/api/v1/sessions", Some(json!({"alternatives": 3}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "SCHEMA");

    let point = json!({"alternatives": ["x1"], "criteria": ["K1"], "structure": {"kind": "point", "matrix": [[1]]}});
    let (status, body) = call(&h.app, "POST", "/api/v1/sessions", Some(point)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "WRONG_VARIANT");

    let mut with_baseline = interval_example();
    with_baseline["baseline"] = json!(["x1"]);
    let id = create(&h.app, with_baseline).await;
    let (_, hist) = call(&h.app, "GET", &format!("/api/v1/sessions/{id}/history"), None).await;
    assert_eq!(hist["baseline_ok"], true);
}

#[tokio::test]
async fn event_flow_and_errors() {
    let h = harness();
    let id = create(&h.app, interval_example()).await;
    let events = format!("/api/v1/sessions/{id}/events");

    let tighten = json!({"sequence": 1, "kind": "tighten", "alternative": "x3", "criterion": "K2", "interval": [8, 9]});
    let (status, delta) = call(&h.app, "POST", &events, Some(tighten.clone())).await;
    assert_eq!(status, StatusCode::OK, "{delta}");
    assert_eq!(delta["new_pareto"], json!(["x1", "x3"]));
    assert_eq!(delta["nesting_ok"], true);

    let (status, body) = call(&h.app, "POST", &events, Some(tighten)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["code"], "STALE_SEQUENCE");

    let widen = json!({"sequence": 2, "kind": "tighten", "alternative": "x3", "criterion": "K2", "interval": [7, 9]});
    let (status, body) = call(&h.app, "POST", &events, Some(widen)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "NOT_A_CONTRACTION");

    let unknown = json!({"sequence": 2, "kind": "tighten", "alternative": "x9", "criterion": "K2", "interval": [8, 9]});
    let (status, body) = call(&h.app, "POST", &events, Some(unknown)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "UNKNOWN_ID");

    let compare = json!({"sequence": 2, "kind": "compare", "criterion": "K1", "preferred": "x1", "other": "x2"});
    let (status, body) = call(&h.app, "POST", &events, Some(compare)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "WRONG_VARIANT");

    let (status, body) = call(&h.app, "POST", &events, Some(json!({"sequence": 2}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "SCHEMA");

    let (status, snap) = call(&h.app, "GET", &format!("/api/v1/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(snap["sequence"], 1);
    assert_eq!(snap["intervals"][2][1], json!([8.0, 9.0]));
    assert_eq!(snap["initial_intervals"][2][1], json!([7.0, 9.0]));
    assert!(snap["log"][0]["timestamp"].is_string());

    let (status, _) = call(&h.app, "POST", "/api/v1/sessions/nope/events", Some(json!({}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn contradictory_comparison_is_409() {
    let h = harness();
    let id = create(&h.app, relation_example()).await;
    let events = format!("/api/v1/sessions/{id}/events");
    let bad = json!({"sequence": 1, "kind": "compare", "criterion": "K1", "preferred": "x2", "other": "x1"});
    let (status, body) = call(&h.app, "POST", &events, Some(bad)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["code"], "CONTRADICTORY");

    let (_, sug) = call(&h.app, "GET", &format!("/api/v1/sessions/{id}/suggestions?limit=1"), None).await;
    assert_eq!(sug[0]["kind"], "compare_pair");
    assert_eq!(sug[0]["multiplicity"], 2);
}

#[tokio::test]
async fn read_endpoints() {
    let h = harness();
    let id = create(&h.app, interval_example()).await;

    let (status, hist) = call(&h.app, "GET", &format!("/api/v1/sessions/{id}/history"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(hist["chain"].as_array().unwrap().len(), 1);
    assert_eq!(hist["nesting_ok"], true);

    let (_, sug) = call(&h.app, "GET", &format!("/api/v1/sessions/{id}/suggestions?limit=0"), None).await;
    assert_eq!(sug, json!([]));

    let (status, pareto) = call(&h.app, "GET", &format!("/api/v1/sessions/{id}/pareto"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(pareto["pareto"], json!(["x1", "x3"]));
    assert_eq!(pareto["witnesses"]["x2"]["by"], "x1");

    for suffix in ["", "/pareto", "/history", "/suggestions"] {
        let (status, body) = call(&h.app, "GET", &format!("/api/v1/sessions/unknown{suffix}"), None).await;
        assert_eq!(status, StatusCode::NOT_FOUND);
        assert_eq!(body["code"], "NOT_FOUND");
    }

    // Reads never advance the session.
    let (_, snap) = call(&h.app, "GET", &format!("/api/v1/sessions/{id}"), None).await;
    assert_eq!(snap["sequence"], 0);
}

#[tokio::test]
async fn undo_flow() {
    let h = harness();
    let id = create(&h.app, interval_example()).await;
    let undo = format!("/api/v1/sessions/{id}/undo");

    let (status, body) = call(&h.app, "POST", &undo, None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["code"], "EMPTY_LOG");

    let (_, before) = call(&h.app, "GET", &format!("/api/v1/sessions/{id}/pareto"), None).await;
    let ev = json!({"sequence": 1, "kind": "tighten", "alternative": "x2", "criterion": "K1", "interval": [1, 1.5]});
    let (status, _) = call(&h.app, "POST", &format!("/api/v1/sessions/{id}/events"), Some(ev)).await;
    assert_eq!(status, StatusCode::OK);

    let (status, body) = call(&h.app, "POST", &undo, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["pareto"], before["pareto"]);
    assert_eq!(body["sequence"], 0);

    let (status, _) = call(&h.app, "POST", &undo, None).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn sessions_survive_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let (store, _) = Store::open(dir.path()).unwrap();
        let app = router(Arc::new(store), &Config::default());
        let id = create(&app, interval_example()).await;
        let ev = json!({"sequence": 1, "kind": "tighten", "alternative": "x3", "criterion": "K1", "interval": [0, 1]});
        let (status, _) = call(&app, "POST", &format!("/api/v1/sessions/{id}/events"), Some(ev)).await;
        assert_eq!(status, StatusCode::OK);
        id
    };
    std::fs::write(dir.path().join("garbage.json"), b"{").unwrap();
    let (store, skipped) = Store::open(dir.path()).unwrap();
    assert_eq!(skipped.len(), 1);
    assert_eq!(store.len(), 1);
    let app = router(Arc::new(store), &Config::default());
    let (_, snap) = call(&app, "GET", &format!("/api/v1/sessions/{id}"), None).await;
    assert_eq!(snap["sequence"], 1);
    assert_eq!(snap["intervals"][2][0], json!([0.0, 1.0]));
}
