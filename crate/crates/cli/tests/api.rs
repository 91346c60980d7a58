use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{header, Request, StatusCode};
use axum::Router;
use pathrisk_cli::api::{ModelSource, Snapshot};
use pathrisk_cli::server::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

const DECISIONS: [&str; 5] = ["ai_confinement", "ai_enforcement", "encourage_safety", "enhance_humans", "review_boards"];

fn app(name: &'static str) -> (Router, Arc<AppState>) {
    let state = AppState::new(Snapshot::load(ModelSource::Bundled(name)).unwrap());
    (router(state.clone()), state)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value, String) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header(header::CONTENT_TYPE, "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let ctype = resp.headers().get(header::CONTENT_TYPE).map(|v| v.to_str().unwrap().to_string()).unwrap_or_default();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null), ctype)
}

async fn raw(app: &Router, method: &str, uri: &str, body: &str) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).body(Body::from(body.to_string())).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn cli_json(args: &[&str]) -> Value {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = pathrisk_cli::cli::run(std::iter::once("pathrisk").chain(args.iter().copied()), &mut out, &mut err);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    serde_json::from_slice(&out).unwrap()
}

#[tokio::test]
async fn model_lists_five_decisions() {
    let (app, _) = app("asipath_v1_lines");
    let (status, v, ctype) = call(&app, "GET", "/api/model", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(ctype.starts_with("application/json"));
    assert_eq!(v["decisions"].as_array().unwrap().len(), 5);
    assert_eq!(v["influences"].as_array().unwrap().len(), 45);
    assert_eq!(v["top"], "asi_catastrophe");
    assert_eq!(v["placeholderParameters"], true);
}

#[tokio::test]
async fn all_decisions_never_raise_risk() {
    for name in ["asipath_v1_lines", "asipath_v1_measures"] {
        let (app, _) = app(name);
        let on: Value = DECISIONS.iter().map(|d| (d.to_string(), json!(true))).collect::<serde_json::Map<_, _>>().into();
        let off: Value = DECISIONS.iter().map(|d| (d.to_string(), json!(false))).collect::<serde_json::Map<_, _>>().into();
        let (s1, t, _) = call(&app, "POST", "/api/quantify", Some(json!({ "decisions": on }))).await;
        let (s2, f, _) = call(&app, "POST", "/api/quantify", Some(json!({ "decisions": off }))).await;
        assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
        assert!(t["topProbability"].as_f64().unwrap() <= f["topProbability"].as_f64().unwrap());
        assert_eq!(t["placeholderParameters"], true);
        assert!(t["perNode"]["asi_catastrophe"].is_number());
    }
}

#[tokio::test]
async fn unknown_ids_are_422() {
    let (app, _) = app("asipath_v1_lines");
    let (status, v, _) = call(&app, "POST", "/api/quantify", Some(json!({ "decisions": { "world_peace": true } }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["id"], "world_peace");
    assert_eq!(v["error"]["code"], "UNKNOWN_DECISION");
    let (status, v, _) = call(&app, "POST", "/api/importance", Some(json!({ "overrides": { "ghost": 0.1 } }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"]["id"], "ghost");
}

#[tokio::test]
async fn malformed_requests_are_400() {
    let (app, _) = app("asipath_v1_lines");
    assert_eq!(raw(&app, "POST", "/api/quantify", "{not json").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(raw(&app, "POST", "/api/quantify", r#"{"decisions": {"review_boards": "yes"}}"#).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(raw(&app, "POST", "/api/quantify", r#"{"extra": 1}"#).await.0, StatusCode::BAD_REQUEST);
    let (status, v) = raw(&app, "POST", "/api/quantify", r#"{"overrides": {"not_deterred": 1.5}}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["code"], "INVALID_PROBABILITY");
    let (app, _) = self::app("asipath_v1_measures");
    let (status, v) = raw(&app, "POST", "/api/quantify", r#"{"gateWeights": {"human_attempts_fail": -0.1}}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"]["code"], "INVALID_WEIGHT");
    assert_eq!(raw(&app, "GET", "/api/cutsets?maxOrder=lots", "").await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn empty_body_is_the_base_scenario() {
    let (app, _) = app("asipath_v1_lines");
    let (status, v) = raw(&app, "POST", "/api/quantify", "").await;
    assert_eq!(status, StatusCode::OK);
    let (_, w, _) = call(&app, "POST", "/api/quantify", Some(json!({}))).await;
    assert_eq!(v, w);
}

#[tokio::test]
async fn cutsets_endpoint() {
    let (app, _) = app("asipath_v1_lines");
    let (status, v, _) = call(&app, "GET", "/api/cutsets?maxOrder=9", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["truncatedAtOrder"], 9);
    assert_eq!(v["cutSets"].as_array().unwrap().len(), 72_000);
    let (app, _) = self::app("asipath_v1_measures");
    let (status, v, _) = call(&app, "GET", "/api/cutsets", None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["error"]["code"], "UNRESOLVED_ANDOR");
}

#[tokio::test]
async fn importance_and_portfolios() {
    let (app, _) = app("asipath_v1_measures");
    let (status, v, _) = call(&app, "POST", "/api/importance", Some(json!({ "decisions": { "review_boards": true } }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["events"].as_object().unwrap().len(), 25);
    assert!(v["events"]["goal_safety_fails"]["fussellVesely"].is_number());
    let (status, v, _) = call(&app, "GET", "/api/portfolios", None).await;
    assert_eq!(status, StatusCode::OK);
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 32);
    let probs: Vec<f64> = entries.iter().map(|e| e["topProbability"].as_f64().unwrap()).collect();
    assert!(probs.windows(2).all(|w| w[0] <= w[1]));
}

#[tokio::test]
async fn repeated_requests_are_identical() {
    let (app, _) = app("asipath_v1_measures");
    let body = json!({ "decisions": { "encourage_safety": true }, "gateWeights": { "seed_ai_measures_fail": 0.25 } });
    let a = call(&app, "POST", "/api/quantify", Some(body.clone())).await;
    let b = call(&app, "POST", "/api/quantify", Some(body)).await;
    assert_eq!(a, b);
    assert_eq!(call(&app, "GET", "/api/model", None).await, call(&app, "GET", "/api/model", None).await);
}

#[tokio::test]
async fn cli_and_api_agree() {
    let (app, _) = app("asipath_v1_measures");
    let (_, api, _) = call(&app, "POST", "/api/quantify", Some(json!({ "decisions": { "review_boards": true, "enhance_humans": true } }))).await;
    let cli = cli_json(&["quantify", "asipath_v1_measures", "--decisions", "review_boards,enhance_humans"]);
    assert_eq!(api, cli);

    let (_, api, _) = call(&app, "POST", "/api/importance", Some(json!({ "overrides": { "not_deterred": 0.2 } }))).await;
    assert_eq!(api, cli_json(&["importance", "asipath_v1_measures", "--set", "not_deterred=0.2"]));

    let (_, api, _) = call(&app, "GET", "/api/model", None).await;
    assert_eq!(api, cli_json(&["expand", "asipath_v1_measures"]));

    let (_, api, _) = call(&app, "GET", "/api/portfolios", None).await;
    assert_eq!(api, cli_json(&["whatif", "asipath_v1_measures"])["portfolios"]);

    let (app, _) = self::app("asipath_v1_lines");
    let (_, api, _) = call(&app, "GET", "/api/cutsets?maxOrder=9", None).await;
    assert_eq!(api, cli_json(&["cutsets", "asipath_v1_lines", "--max-order", "9"]));
}

#[tokio::test]
async fn reload_swaps_the_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.risk");
    std::fs::write(&path, "model \"first\"\nevent a { p = 0.25 }\ntop = a\n").unwrap();
    let state = AppState::new(Snapshot::load(ModelSource::File(path.clone())).unwrap());
    let app = router(state.clone());
    let (_, v, _) = call(&app, "POST", "/api/quantify", None).await;
    assert_eq!(v["topProbability"], 0.25);
    assert_eq!(v["placeholderParameters"], false);

    std::fs::write(&path, "model \"second\"\nevent a { p = 0.5 }\ntop = a\n").unwrap();
    // nothing changes until reload
    let (_, v, _) = call(&app, "POST", "/api/quantify", None).await;
    assert_eq!(v["topProbability"], 0.25);
    let (status, v, _) = call(&app, "POST", "/api/reload", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["name"], "second");
    let (_, v, _) = call(&app, "POST", "/api/quantify", None).await;
    assert_eq!(v["topProbability"], 0.5);

    std::fs::write(&path, "model \"broken\"\nevent a { p = 2 }\ntop = a\n").unwrap();
    let (status, v, _) = call(&app, "POST", "/api/reload", None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["error"]["code"], "MODEL_INVALID");
    assert_eq!(state.current().flat.name(), "second");
}

#[tokio::test]
async fn only_reload_is_a_post_without_body() {
    let (app, _) = app("asipath_v1_lines");
    let resp = app.clone().oneshot(Request::builder().method("POST").uri("/api/model").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(resp.status(), StatusCode::METHOD_NOT_ALLOWED);
    let resp = app.oneshot(Request::builder().uri("/api/nothing").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(resp.status(), StatusCode::NOT_FOUND);
}
