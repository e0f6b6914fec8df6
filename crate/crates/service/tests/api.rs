#[path = "support/server.rs"]
mod server;

use serde_json::{json, Value};

fn run_body(seed: u64) -> Value {
    json!({ "scenario": "high_traffic", "seed": seed, "tick_interval_ms": 1 })
}

#[test]
fn kpi_windows() {
    let dir = tempfile::tempdir().unwrap();
    let s = server::start(dir.path());
    let id = s.create(run_body(3));
    let info = s.step(&id, 150);
    assert_eq!(info["ticks"], 150);

    let (code, all) = s.get(&format!("/runs/{id}/kpis"));
    assert_eq!(code, 200);
    assert_eq!(all["rows"].as_array().unwrap().len(), 150);
    assert_eq!(all["clipped"], false);
    assert!(all["intervals"].is_array());

    let (code, tail) = s.get(&format!("/runs/{id}/kpis?from=100&to=200"));
    assert_eq!(code, 200);
    let rows = tail["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 50);
    assert_eq!(tail["clipped"], true);
    assert_eq!(rows[0]["tick"], 100);
    assert_eq!(rows[49]["tick"], 149);

    let (code, err) = s.get(&format!("/runs/{id}/kpis?from=20&to=10"));
    assert_eq!(code, 400);
    assert_eq!(err["error"], "bad_request");
}

#[test]
fn unknown_runs_are_not_found() {
    let dir = tempfile::tempdir().unwrap();
    let s = server::start(dir.path());
    let (code, err) = s.post("/runs/run-nope/control", json!({"action": "stop"}));
    assert_eq!(code, 404);
    assert_eq!(err["error"], "not_found");
    assert_eq!(s.get("/runs/run-nope").0, 404);
    assert_eq!(s.get("/runs/run-nope/kpis").0, 404);
}

#[test]
fn bad_configs_are_diagnosed() {
    let dir = tempfile::tempdir().unwrap();
    let s = server::start(dir.path());
    let (code, err) = s.post("/runs", json!({ "config": "name = \"x\"\n[sim]\nseed = 1\n" }));
    assert_eq!(code, 400);
    assert!(err["message"].as_str().unwrap().contains("traffic"), "{err}");
    let (code, _) = s.post("/runs", json!({ "scenario": "no_such_scenario" }));
    assert_eq!(code, 400);
    let (code, _) = s.post("/runs", json!({}));
    assert_eq!(code, 400);
}

#[test]
fn stepping_in_chunks_matches_stepping_at_once() {
    let dir = tempfile::tempdir().unwrap();
    let s = server::start(dir.path());
    let a = s.create(run_body(9));
    let b = s.create(run_body(9));
    s.step(&a, 24);
    for _ in 0..6 {
        s.step(&b, 4);
        let (code, _) = s.post(&format!("/runs/{b}/control"), json!({"action": "pause"}));
        assert_eq!(code, 200);
    }
    let (_, ka) = s.get(&format!("/runs/{a}/kpis"));
    let (_, kb) = s.get(&format!("/runs/{b}/kpis"));
    assert_eq!(ka["rows"], kb["rows"]);
    assert_eq!(ka["rows"].as_array().unwrap().len(), 24);
}

#[test]
fn playing_stops_at_the_tick_budget() {
    let dir = tempfile::tempdir().unwrap();
    let s = server::start(dir.path());
    let id = s.create(json!({ "scenario": "default", "max_ticks": 8, "tick_interval_ms": 1 }));
    let (code, _) = s.post(&format!("/runs/{id}/control"), json!({"action": "start"}));
    assert_eq!(code, 200);
    let t0 = std::time::Instant::now();
    loop {
        let (_, info) = s.get(&format!("/runs/{id}"));
        if info["status"] == "paused" && info["ticks"] == 8 {
            break;
        }
        assert!(t0.elapsed().as_secs() < 60, "{info}");
        std::thread::sleep(std::time::Duration::from_millis(20));
    }
    let (_, list) = s.get("/runs");
    assert!(list.as_array().unwrap().iter().any(|r| r["run_id"] == id.as_str()));
}

#[test]
fn stopped_runs_refuse_new_work() {
    let dir = tempfile::tempdir().unwrap();
    let s = server::start(dir.path());
    let id = s.create(run_body(1));
    s.step(&id, 3);
    let (code, info) = s.post(&format!("/runs/{id}/control"), json!({"action": "stop"}));
    assert_eq!(code, 200);
    assert_eq!(info["status"], "stopped");
    let (code, err) = s.post(&format!("/runs/{id}/intents"), json!({"text": "Boost throughput by 15%"}));
    assert_eq!(code, 503);
    assert_eq!(err["error"], "service_unavailable");
    // stopping twice is harmless and the trace stays readable
    assert_eq!(s.post(&format!("/runs/{id}/control"), json!({"action": "stop"})).0, 200);
    assert_eq!(s.get(&format!("/runs/{id}/kpis")).1["rows"].as_array().unwrap().len(), 3);
    let run_dir = dir.path().join(&id);
    assert!(run_dir.join("checkpoints").join("hrl_final.json").exists());
}

#[test]
fn intents_flow_through_the_stream_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let s = server::start(dir.path());
    let id = s.create(run_body(5));
    s.step(&id, 30);
    let (code, rx) = s.post(&format!("/runs/{id}/intents"), json!({"text": "Increase throughput by 10%"}));
    assert_eq!(code, 202);
    assert_eq!(rx["step"], "received");
    let intent = rx["intent_id"].as_u64().unwrap();
    let (code, wi) = s.post(&format!("/runs/{id}/what-if"), json!({"text": "Increase energy efficiency by 20%"}));
    assert_eq!(code, 200);
    assert!(wi.get("stage").is_some());
    s.step(&id, 2);

    // 30 kpi items, the received event, then the pipeline and two more ticks
    let all = s.sse(&format!("/runs/{id}/events"), None, 36);
    assert!(all.windows(2).all(|w| w[1].0 == w[0].0 + 1));
    assert_eq!(all[0].0, 1);
    let steps: Vec<&str> = all
        .iter()
        .filter(|e| e.1 == "pipeline" && e.2["intent_id"] == intent)
        .map(|e| e.2["step"].as_str().unwrap())
        .collect();
    assert_eq!(&steps[..3], ["received", "processed", "validated"]);

    let resumed = s.sse(&format!("/runs/{id}/events"), Some(all[20].0), 10);
    assert_eq!(resumed[0].0, all[21].0);
    for (r, a) in resumed.iter().zip(&all[21..]) {
        assert_eq!(r, a);
    }
    let via_query = s.sse(&format!("/runs/{id}/events?after={}", all[20].0), None, 1);
    assert_eq!(via_query[0], all[21]);

    let only = s.sse(&format!("/runs/{id}/events?intent_id={intent}"), None, steps.len());
    assert!(only.iter().all(|e| e.1 == "pipeline" && e.2["intent_id"] == intent));
}
