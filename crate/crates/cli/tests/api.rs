use std::path::{Path, PathBuf};
use std::sync::Arc;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde_json::{json, Value};

use eipe_cli::{serve, ApiConfig, BackendConfig, ServiceHandle};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(bank: &Path) -> ApiConfig {
    ApiConfig {
        listen: "127.0.0.1:0".parse().unwrap(),
        ..ApiConfig::new(bank, BackendConfig::Mock { fixture: root().join("fixtures/mock.toml") })
    }
}

fn start() -> (ServiceHandle, String) {
    let h = serve(&config(&root().join("bank"))).unwrap();
    let base = format!("http://{}", h.addr);
    (h, base)
}

fn post(c: &Client, base: &str, problem: &str, user: &str, prompt: &str) -> (StatusCode, Value) {
    let r = c
        .post(format!("{base}/problems/{problem}/attempts"))
        .json(&json!({ "user_id": user, "prompt_text": prompt }))
        .send()
        .unwrap();
    (r.status(), r.json().unwrap())
}

#[test]
fn health_and_problem_listing() {
    let (h, base) = start();
    let c = Client::new();
    let health: Value = c.get(format!("{base}/health")).send().unwrap().json().unwrap();
    assert_eq!(health["status"], "ok");

    let list: Vec<Value> = c.get(format!("{base}/problems")).send().unwrap().json().unwrap();
    assert_eq!(list.len(), 8);
    for p in &list {
        assert!(p.get("reference_source").is_none());
        assert!(p.get("remaining_attempts").is_none());
        let code = p["statement_code"].as_str().unwrap();
        assert!(code.contains("foo("), "{code}");
    }

    let one: Value = c
        .get(format!("{base}/problems/reverse-string?user_id=u1"))
        .send()
        .unwrap()
        .json()
        .unwrap();
    assert_eq!(one["char_limit"], 250);
    assert_eq!(one["remaining_attempts"], 20);
    assert_eq!(one["solved"], false);

    let missing = c.get(format!("{base}/problems/nope")).send().unwrap();
    assert_eq!(missing.status(), StatusCode::NOT_FOUND);
    h.shutdown().unwrap();
}

#[test]
fn broken_bank_stops_startup() {
    let dir = tempfile::tempdir().unwrap();
    for e in std::fs::read_dir(root().join("bank")).unwrap() {
        let e = e.unwrap();
        std::fs::copy(e.path(), dir.path().join(e.file_name())).unwrap();
    }
    let path = dir.path().join("sum-between.toml");
    let text = std::fs::read_to_string(&path).unwrap().replace("return s;", "return s");
    std::fs::write(&path, text).unwrap();
    let err = serve(&config(dir.path())).err().expect("startup must fail");
    let msg = format!("{err:#}");
    assert!(msg.contains("sum-between"), "{msg}");
    assert!(!msg.contains("count-even"), "{msg}");
}

#[test]
fn redaction_lifts_after_solve() {
    let (h, base) = start();
    let c = Client::new();
    let (s, wrong) = post(&c, &base, "index-last-zero", "ana", "returns the index of the first zero in the array");
    assert_eq!(s, StatusCode::OK);
    assert_eq!(wrong["verdict_kind"], "TestFail");
    assert_eq!(wrong["attempt_index"], 1);
    assert_eq!(wrong["remaining"], 19);
    for case in wrong["case_results"].as_array().unwrap() {
        assert!(case.get("expected_observation").is_none());
        assert!(case.get("actual_observation").is_none());
    }

    let (_, right) = post(&c, &base, "index-last-zero", "ana", "index of the last zero, or -1");
    assert_eq!(right["verdict_kind"], "Pass");
    assert_eq!(right["solved"], true);
    assert!(right["case_results"][0]["expected_observation"].is_string());

    // earlier attempts are revealed once solved
    let hist: Vec<Value> = c
        .get(format!("{base}/users/ana/attempts?problem=index-last-zero"))
        .send()
        .unwrap()
        .json()
        .unwrap();
    assert_eq!(hist.len(), 2);
    assert!(hist[0]["case_results"][0]["expected_observation"].is_string());

    let (_, extra) = post(&c, &base, "index-last-zero", "ana", "index of the last zero");
    assert_eq!(extra["exploratory"], true);
    assert_eq!(extra["remaining"], 18);
    h.shutdown().unwrap();
}

#[test]
fn char_limit_is_not_counted() {
    let (h, base) = start();
    let c = Client::new();
    let long = "flips a string ".repeat(20);
    let (s, body) = post(&c, &base, "reverse-string", "bo", &long);
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["limit"], 250);
    assert_eq!(body["actual"], long.chars().count());
    assert_eq!(body["counted"], false);
    let p: Value = c
        .get(format!("{base}/problems/reverse-string?user_id=bo"))
        .send()
        .unwrap()
        .json()
        .unwrap();
    assert_eq!(p["remaining_attempts"], 20);

    let (s, _) = post(&c, &base, "reverse-string", "bo", "   ");
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = post(&c, &base, "nope", "bo", "x");
    assert_eq!(s, StatusCode::NOT_FOUND);
    h.shutdown().unwrap();
}

#[test]
fn exhausted_attempts_conflict() {
    let (h, base) = start();
    let c = Client::new();
    for _ in 0..20 {
        let (s, _) = post(&c, &base, "sum-between", "cy", "something unrelated");
        assert_eq!(s, StatusCode::OK);
    }
    let (s, body) = post(&c, &base, "sum-between", "cy", "something unrelated");
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(body["max_attempts"], 20);
    h.shutdown().unwrap();
}

#[test]
fn idempotency_key_replays_the_first_answer() {
    let (h, base) = start();
    let c = Client::new();
    let send = || -> Value {
        c.post(format!("{base}/problems/count-even/attempts"))
            .header("idempotency-key", "k-1")
            .json(&json!({ "user_id": "di", "prompt_text": "counts the even numbers" }))
            .send()
            .unwrap()
            .json()
            .unwrap()
    };
    let a = send();
    let b = send();
    assert_eq!(a["attempt_id"], b["attempt_id"]);
    assert_eq!(h.engine.history("di", None).len(), 1);
    h.shutdown().unwrap();
}

#[test]
fn concurrent_users_are_all_logged() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("attempts.jsonl");
    let cfg = ApiConfig {
        log: Some(log.clone()),
        ..config(&root().join("bank"))
    };
    let h = serve(&cfg).unwrap();
    let base = Arc::new(format!("http://{}", h.addr));
    let threads: Vec<_> = ["u1", "u2"]
        .into_iter()
        .flat_map(|u| {
            ["sum-between", "contains-vowel"].into_iter().map(move |p| (u, p))
        })
        .map(|(u, p)| {
            let base = base.clone();
            std::thread::spawn(move || {
                let prompt = match p {
                    "sum-between" => "sum of all integers between a and b",
                    _ => "returns 1 if the string contains a vowel",
                };
                post(&Client::new(), &base, p, u, prompt)
            })
        })
        .collect();
    for t in threads {
        let (s, body) = t.join().unwrap();
        assert_eq!(s, StatusCode::OK);
        assert_eq!(body["verdict_kind"], "Pass", "{body}");
    }
    h.shutdown().unwrap();
    let lines = std::fs::read_to_string(&log).unwrap();
    assert_eq!(lines.lines().count(), 4);
    for u in ["u1", "u2"] {
        assert_eq!(lines.matches(&format!("\"user_id\":\"{u}\"")).count(), 2);
    }
}

#[test]
fn analytics_endpoints_return_csv() {
    let (h, base) = start();
    let c = Client::new();
    post(&c, &base, "sum-between", "ed", "sum of all integers between a and b");
    let r = c.get(format!("{base}/analytics/task-stats")).send().unwrap();
    assert!(r.headers()["content-type"].to_str().unwrap().starts_with("text/csv"));
    let text = r.text().unwrap();
    assert!(text.lines().any(|l| l.starts_with("sum-between,")), "{text}");

    let lengths = c
        .get(format!("{base}/analytics/length-distribution?bin=5"))
        .send()
        .unwrap()
        .text()
        .unwrap();
    assert!(lengths.starts_with("group,bin_start,bin_end,count"), "{lengths}");
    assert!(lengths.contains("Lab A,"), "{lengths}");
    let bad = c.get(format!("{base}/analytics/length-distribution?bin=0")).send().unwrap();
    assert_eq!(bad.status(), StatusCode::BAD_REQUEST);
    h.shutdown().unwrap();
}
