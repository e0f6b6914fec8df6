#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use intent_ran_service::api::router;
use intent_ran_service::live::Manager;
use serde_json::Value;

pub struct Server {
    pub base: String,
    pub agent: ureq::Agent,
}

/// Serves the API on an ephemeral port from a background runtime.
pub fn start(data_dir: &Path) -> Server {
    let manager = Arc::new(Manager::new(data_dir.to_path_buf(), None));
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, router(manager)).await.unwrap();
        });
    });
    let addr = rx.recv().unwrap();
    let agent = ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(Duration::from_secs(60)))
        .build()
        .into();
    Server { base: format!("http://{addr}"), agent }
}

impl Server {
    pub fn get(&self, path: &str) -> (u16, Value) {
        let mut r = self.agent.get(&format!("{}{path}", self.base)).call().unwrap();
        let code = r.status().as_u16();
        (code, r.body_mut().read_json().unwrap_or(Value::Null))
    }

    pub fn post(&self, path: &str, body: Value) -> (u16, Value) {
        let mut r = self.agent.post(&format!("{}{path}", self.base)).send_json(body).unwrap();
        let code = r.status().as_u16();
        (code, r.body_mut().read_json().unwrap_or(Value::Null))
    }

    pub fn create(&self, body: Value) -> String {
        let (code, info) = self.post("/runs", body);
        assert_eq!(code, 201, "{info}");
        info["run_id"].as_str().unwrap().to_string()
    }

    pub fn step(&self, id: &str, n: u64) -> Value {
        let (code, info) = self.post(&format!("/runs/{id}/control"), serde_json::json!({"action": "step", "n": n}));
        assert_eq!(code, 200, "{info}");
        info
    }

    /// Reads `n` server-push events as (id, kind, data).
    pub fn sse(&self, path: &str, last_event_id: Option<u64>, n: usize) -> Vec<(u64, String, Value)> {
        let mut req = self.agent.get(&format!("{}{path}", self.base));
        if let Some(id) = last_event_id {
            req = req.header("Last-Event-ID", &id.to_string());
        }
        let mut resp = req.call().unwrap();
        assert_eq!(resp.status().as_u16(), 200);
        let reader: Box<dyn Read + Send> = Box::new(resp.body_mut().as_reader());
        let mut lines = BufReader::new(reader).lines();
        let mut out = Vec::new();
        let (mut id, mut kind, mut data) = (None, String::new(), String::new());
        while out.len() < n {
            let line = lines.next().expect("stream ended early").unwrap();
            if line.is_empty() {
                if let Some(i) = id.take() {
                    out.push((i, std::mem::take(&mut kind), serde_json::from_str(&data).unwrap()));
                }
                data.clear();
                continue;
            }
            if let Some(v) = line.strip_prefix("id:") {
                id = Some(v.trim().parse().unwrap());
            } else if let Some(v) = line.strip_prefix("event:") {
                kind = v.trim().to_string();
            } else if let Some(v) = line.strip_prefix("data:") {
                data.push_str(v.strip_prefix(' ').unwrap_or(v));
            }
        }
        out
    }
}
