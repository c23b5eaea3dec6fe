use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use cubeslide::config::{ConfigDoc, LabeledConfig};
use cubeslide::moves::MoveEngine;
use cubeslide_server::{router, ServerConfig};
use http_body_util::BodyExt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, v)
}

fn app() -> Router {
    router(&ServerConfig::default())
}

fn doc(d: u32, tokens: &[(&str, u8)]) -> Value {
    let map: serde_json::Map<String, Value> = tokens.iter().map(|(v, c)| (v.to_string(), json!(c))).collect();
    json!({ "d": d, "tokens": map })
}

fn sample_request() -> Value {
    json!({
        "d": 3, "k": 2, "l": 4,
        "scramble": { "config": doc(3, &[("001", 1), ("000", 2), ("100", 3), ("010", 4)]) },
        "target": { "config": doc(3, &[("100", 1), ("001", 2), ("000", 3), ("010", 4)]) },
    })
}

fn config_of(v: &Value) -> LabeledConfig {
    let d: ConfigDoc = serde_json::from_value(v.clone()).unwrap();
    d.to_labeled().unwrap()
}

#[tokio::test]
async fn random_scramble_session_is_solvable() {
    let app = app();
    let (s, v) = call(&app, "POST", "/api/session", Some(json!({"d":3,"k":2,"l":4,"scramble":{"random-steps":20,"seed":5}}))).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["solvable"], true);
    assert_eq!(v["solved"], false);
    assert!(!v["legal_moves"].as_array().unwrap().is_empty());
    let id = v["id"].as_str().unwrap();
    let (s, sv) = call(&app, "GET", &format!("/api/session/{id}/solvable"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(sv["solvable"], true);
    let (s, got) = call(&app, "GET", &format!("/api/session/{id}"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(got["current"], v["current"]);
}

#[tokio::test]
async fn sample_session_hints_finish_in_six() {
    let app = app();
    let (s, v) = call(&app, "POST", "/api/session", Some(sample_request())).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let id = v["id"].as_str().unwrap().to_string();
    let mut expected = 6;
    loop {
        let (s, h) = call(&app, "GET", &format!("/api/session/{id}/hint"), None).await;
        assert_eq!(s, StatusCode::OK, "{h}");
        assert_eq!(h["remaining"], expected);
        if expected == 0 {
            assert!(h["move"].is_null());
            break;
        }
        if expected == 6 {
            assert_eq!(h["move"]["label"], 1);
            assert_eq!(h["move"]["from"], "001");
            assert_eq!(h["move"]["to"], "101");
        }
        let body = json!({"label": h["move"]["label"], "to": h["move"]["to"]});
        let (s, st) = call(&app, "POST", &format!("/api/session/{id}/move"), Some(body)).await;
        assert_eq!(s, StatusCode::OK);
        expected -= 1;
        assert_eq!(st["solved"], expected == 0);
    }
}

#[tokio::test]
async fn stuck_tokens_and_illegal_moves() {
    let app = app();
    let semi = doc(3, &[("000", 1), ("100", 2), ("110", 3), ("010", 4), ("001", 5)]);
    let req = json!({"d":3,"k":2,"l":3,"scramble":{"config": semi.clone()},"target":{"config": semi}});
    let (s, v) = call(&app, "POST", "/api/session", Some(req)).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["stuck"], json!([1, 2, 3, 4]));
    assert_eq!(v["solved"], true);
    let id = v["id"].as_str().unwrap();
    let (s, e) = call(&app, "POST", &format!("/api/session/{id}/move"), Some(json!({"label":1,"to":"001"}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(e["state"]["current"], v["current"]);
    let (_, after) = call(&app, "GET", &format!("/api/session/{id}"), None).await;
    assert_eq!(after["current"], v["current"]);
    assert!(after["history"].as_array().unwrap().is_empty());
    // token 5 roams the top face; undo brings it back
    let (s, moved) = call(&app, "POST", &format!("/api/session/{id}/move"), Some(json!({"label":5,"to":"111"}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(moved["solved"], false);
    let (s, back) = call(&app, "POST", &format!("/api/session/{id}/move"), Some(json!({"label":5,"to":"001"}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(back["current"], v["current"]);
    assert_eq!(back["solved"], true);
}

#[tokio::test]
async fn parity_twisted_session_is_unsolvable() {
    let app = app();
    let req = json!({
        "d": 3, "k": 2, "l": 4,
        "scramble": { "config": doc(3, &[("001", 2), ("000", 1), ("100", 3), ("010", 4)]) },
        "target": { "config": doc(3, &[("001", 1), ("000", 2), ("100", 3), ("010", 4)]) },
    });
    let (s, v) = call(&app, "POST", "/api/session", Some(req)).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["solvable"], false);
    let id = v["id"].as_str().unwrap();
    let (s, sv) = call(&app, "GET", &format!("/api/session/{id}/solvable"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(sv["solvable"], false);
    let (s, _) = call(&app, "GET", &format!("/api/session/{id}/hint"), None).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn exhausted_budget_is_too_early() {
    let app = router(&ServerConfig { search_budget: 50, ..ServerConfig::default() });
    let (s, v) = call(&app, "POST", "/api/session", Some(json!({"d":4,"k":3,"l":11,"scramble":{"random_steps":40,"seed":1}}))).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let id = v["id"].as_str().unwrap();
    let (s, _) = call(&app, "GET", &format!("/api/session/{id}/solvable"), None).await;
    assert_eq!(s, StatusCode::from_u16(425).unwrap());
    let (s, _) = call(&app, "GET", &format!("/api/session/{id}/hint"), None).await;
    assert_eq!(s, StatusCode::from_u16(425).unwrap());
}

#[tokio::test]
async fn bad_requests() {
    let app = app();
    let (s, _) = call(&app, "GET", "/api/session/nope", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, "POST", "/api/session", Some(json!({"d":3,"k":4,"l":4}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&app, "POST", "/api/session", Some(json!({"d":3,"k":2,"l":4,"target":"weird"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let wrong_l = json!({"d":3,"k":2,"l":5,"scramble":{"config": doc(3, &[("001", 1), ("000", 2), ("100", 3), ("010", 4)])}});
    let (s, _) = call(&app, "POST", "/api/session", Some(wrong_l)).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn analysis_endpoints() {
    let app = app();
    let semi = doc(3, &[("000", 1), ("100", 2), ("110", 3), ("010", 4), ("001", 5)]);
    let (s, v) = call(&app, "POST", "/api/classify", Some(json!({"config": semi, "k": 2}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v, json!({"kind":"semi-isolated","stuck":[1,2,3,4],"component_size":4,"truncated":false}));
    let (s, v) = call(&app, "GET", "/api/sdk?d=5&k=2", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v[0]["S"], 6);
}

#[tokio::test]
async fn cors_allows_localhost() {
    let app = app();
    let req = Request::builder()
        .method("GET")
        .uri("/api/sdk?d=3&k=2")
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.headers()["access-control-allow-origin"], "http://localhost:5173");
    let req = Request::builder().uri("/api/sdk?d=3&k=2").header("origin", "http://evil.example").body(Body::empty()).unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert!(resp.headers().get("access-control-allow-origin").is_none());
}

/// Random move requests, legal or not, never leave the session in a state
/// that its history does not explain.
#[tokio::test]
async fn fuzzed_moves_keep_state_consistent() {
    let app = app();
    let mut rng = StdRng::seed_from_u64(11);
    for (d, k, l) in [(3, 2, 4), (3, 1, 2), (4, 3, 11)] {
        let (s, v) = call(&app, "POST", "/api/session", Some(json!({"d":d,"k":k,"l":l,"scramble":{"random_steps":10,"seed":3}}))).await;
        assert_eq!(s, StatusCode::OK);
        let id = v["id"].as_str().unwrap().to_string();
        let engine = MoveEngine::new(d, k).unwrap();
        let start = config_of(&v["current"]);
        let n = (1u32 << d) - l;
        for _ in 0..150 {
            let (_, before) = call(&app, "GET", &format!("/api/session/{id}"), None).await;
            let legal = before["legal_moves"].as_array().unwrap().clone();
            let body = if rng.gen_bool(0.5) && !legal.is_empty() {
                let m = &legal[rng.gen_range(0..legal.len())];
                json!({"label": m["label"], "to": m["to"]})
            } else {
                let to: String = (0..d).map(|_| if rng.gen_bool(0.5) { '1' } else { '0' }).collect();
                json!({"label": rng.gen_range(0..=n + 1), "to": to})
            };
            let (s, after) = call(&app, "POST", &format!("/api/session/{id}/move"), Some(body.clone())).await;
            let was_legal = legal.iter().any(|m| m["label"] == body["label"] && m["to"] == body["to"]);
            if was_legal {
                assert_eq!(s, StatusCode::OK);
            } else {
                assert_eq!(s, StatusCode::CONFLICT, "{body}");
                assert_eq!(after["state"]["current"], before["current"]);
            }
            let (_, now) = call(&app, "GET", &format!("/api/session/{id}"), None).await;
            let history: Vec<cubeslide::Move> = serde_json::from_value(now["history"].clone()).unwrap();
            let mut c = start;
            for m in &history {
                c = engine.apply_move(&c, m).expect("history replays");
            }
            assert_eq!(c, config_of(&now["current"]));
        }
    }
}

#[tokio::test]
async fn hint_decreases_distance() {
    let app = app();
    for seed in 0..4u64 {
        let (_, v) = call(&app, "POST", "/api/session", Some(json!({"d":3,"k":2,"l":4,"scramble":{"random_steps":30,"seed":seed}}))).await;
        let id = v["id"].as_str().unwrap().to_string();
        let (_, h) = call(&app, "GET", &format!("/api/session/{id}/hint"), None).await;
        let r = h["remaining"].as_u64().unwrap();
        if r == 0 {
            continue;
        }
        let body = json!({"label": h["move"]["label"], "to": h["move"]["to"]});
        call(&app, "POST", &format!("/api/session/{id}/move"), Some(body)).await;
        let (_, sv) = call(&app, "GET", &format!("/api/session/{id}/solvable"), None).await;
        assert_eq!(sv["distance"].as_u64().unwrap(), r - 1);
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn sessions_are_isolated() {
    let app = app();
    let (_, a) = call(&app, "POST", "/api/session", Some(json!({"d":3,"k":2,"l":4,"scramble":{"random_steps":15,"seed":1}}))).await;
    let (_, b) = call(&app, "POST", "/api/session", Some(json!({"d":3,"k":2,"l":4,"scramble":{"random_steps":15,"seed":2}}))).await;
    let ida = a["id"].as_str().unwrap().to_string();
    let idb = b["id"].as_str().unwrap().to_string();
    let play = |id: String, seed: u64| {
        let app = app.clone();
        tokio::spawn(async move {
            let mut rng = StdRng::seed_from_u64(seed);
            let mut made = Vec::new();
            for _ in 0..60 {
                let (_, st) = call(&app, "GET", &format!("/api/session/{id}"), None).await;
                let legal = st["legal_moves"].as_array().unwrap().clone();
                let m = &legal[rng.gen_range(0..legal.len())];
                let (s, _) = call(&app, "POST", &format!("/api/session/{id}/move"), Some(json!({"label": m["label"], "to": m["to"]}))).await;
                assert_eq!(s, StatusCode::OK);
                made.push(m.clone());
            }
            made
        })
    };
    let (ma, mb) = tokio::join!(play(ida.clone(), 7), play(idb.clone(), 8));
    let (ma, mb) = (ma.unwrap(), mb.unwrap());
    let (_, fa) = call(&app, "GET", &format!("/api/session/{ida}"), None).await;
    let (_, fb) = call(&app, "GET", &format!("/api/session/{idb}"), None).await;
    let ha = fa["history"].as_array().unwrap();
    let hb = fb["history"].as_array().unwrap();
    assert_eq!(ha.len(), 60);
    assert_eq!(hb.len(), 60);
    for (h, m) in ha.iter().zip(&ma) {
        assert_eq!((&h["label"], &h["to"]), (&m["label"], &m["to"]));
    }
    for (h, m) in hb.iter().zip(&mb) {
        assert_eq!((&h["label"], &h["to"]), (&m["label"], &m["to"]));
    }
}

#[tokio::test]
async fn lru_evicts_oldest_session() {
    let app = router(&ServerConfig { capacity: 2, ..ServerConfig::default() });
    let mut ids = Vec::new();
    for seed in 0..3 {
        let (_, v) = call(&app, "POST", "/api/session", Some(json!({"d":2,"k":1,"l":1,"scramble":{"random_steps":3,"seed":seed}}))).await;
        ids.push(v["id"].as_str().unwrap().to_string());
    }
    let (s, _) = call(&app, "GET", &format!("/api/session/{}", ids[0]), None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    for id in &ids[1..] {
        let (s, _) = call(&app, "GET", &format!("/api/session/{id}"), None).await;
        assert_eq!(s, StatusCode::OK);
    }
}

#[tokio::test]
async fn expired_sessions_are_dropped() {
    let app = router(&ServerConfig { ttl: std::time::Duration::from_millis(30), ..ServerConfig::default() });
    let (_, v) = call(&app, "POST", "/api/session", Some(json!({"d":2,"k":1,"l":1}))).await;
    let id = v["id"].as_str().unwrap();
    tokio::time::sleep(std::time::Duration::from_millis(80)).await;
    let (s, _) = call(&app, "GET", &format!("/api/session/{id}"), None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}
