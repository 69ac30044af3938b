#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use graphlf::engine::Step;
use graphlf::systems::Registry;
use graphlf_server::session::SessionStore;
use graphlf_server::{router, AppState};
use http_body_util::BodyExt;
use proptest::prelude::*;
use serde_json::{json, Value};
use tower::ServiceExt;

#[derive(Debug, Clone)]
enum Op {
    Apply { rule: usize, stale: bool },
    Undo { stale: bool },
    Tactic { rule: usize, fuel: u64 },
    Missing,
}

const RULES: &[&str] = &["impI", "impE", "andI", "andE1", "orI1", "orI2", "hyp", "bogus"];

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        4 => (0..RULES.len(), prop::bool::weighted(0.2)).prop_map(|(rule, stale)| Op::Apply { rule, stale }),
        1 => prop::bool::weighted(0.3).prop_map(|stale| Op::Undo { stale }),
        1 => (0..RULES.len(), 1u64..20).prop_map(|(rule, fuel)| Op::Tactic { rule, fuel }),
        1 => Just(Op::Missing),
    ]
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn scenario(goal: String, ops: Vec<Op>) -> Result<(), TestCaseError> {
    let app = router(Arc::new(AppState::new(
        Registry::builtin(),
        None,
        SessionStore::in_memory(),
    )));
    let (s, text) = call(
        &app,
        Method::POST,
        "/api/v1/sessions",
        Some(json!({"system": "nd-intuitionistic", "goal": goal})),
    )
    .await;
    prop_assert_eq!(s, StatusCode::CREATED);
    let id = serde_json::from_str::<Value>(&text).unwrap()["sessionId"]
        .as_str()
        .unwrap()
        .to_string();
    let base = format!("/api/v1/sessions/{id}");
    let sys = common::system("nd-intuitionistic");
    for op in ops {
        let (_, state) = call(&app, Method::GET, &base, None).await;
        let before: Value = serde_json::from_str(&state).unwrap();
        let (_, doc_before) = call(&app, Method::GET, &format!("{base}/export"), None).await;
        let version = before["version"].as_u64().unwrap();
        let v = |stale: bool| if stale { version + 1 } else { version };
        let (status, _) = match op {
            Op::Apply { rule, stale } => {
                let mut body = serde_json::to_value(Step::new(RULES[rule])).unwrap();
                body["version"] = json!(v(stale));
                call(&app, Method::POST, &format!("{base}/apply"), Some(body)).await
            }
            Op::Undo { stale } => {
                call(
                    &app,
                    Method::POST,
                    &format!("{base}/undo"),
                    Some(json!({"version": v(stale)})),
                )
                .await
            }
            Op::Tactic { rule, fuel } => {
                let body =
                    json!({"tactic": format!("Many(Atomic({}))", RULES[rule]), "fuel": fuel, "version": version});
                call(&app, Method::POST, &format!("{base}/tactic"), Some(body)).await
            }
            Op::Missing => {
                call(
                    &app,
                    Method::POST,
                    &format!("{base}/apply"),
                    Some(json!({"rule": "impI"})),
                )
                .await
            }
        };
        let (_, state) = call(&app, Method::GET, &base, None).await;
        let after: Value = serde_json::from_str(&state).unwrap();
        let (_, doc_after) = call(&app, Method::GET, &format!("{base}/export"), None).await;
        if !status.is_success() {
            prop_assert_eq!(&after, &before, "{:?} changed the session", status);
            prop_assert_eq!(&doc_after, &doc_before);
        }
        // the logged steps rebuild the exported proof
        let steps: Vec<Step> = serde_json::from_value(after["steps"].clone()).unwrap();
        let mut replay = sys.new_proof(&goal).unwrap();
        for s in &steps {
            let mut s = s.clone();
            s.target = None;
            replay.apply(&s).unwrap();
        }
        if steps.iter().all(|s| s.target.is_none()) {
            prop_assert_eq!(replay.export().to_json(), doc_after);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn errors_leave_sessions_unchanged(
        goal in common::formula_text(common::ATOMS, &[("->", 2), ("and", 2), ("or", 2)], 3),
        ops in prop::collection::vec(op(), 1..12),
    ) {
        let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
        rt.block_on(scenario(goal, ops))?;
    }
}
