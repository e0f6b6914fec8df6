//! Live runs: one simulator thread per run, driven by messages.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender, TryRecvError};
use std::sync::{Arc, Mutex, RwLock};
use std::thread;
use std::time::Duration;

use intent_ran::apps::AppId;
use intent_ran::intent::{shipped_examples, LlmBackend};
use intent_ran::runtime::{AppChange, PipelineEvent, Runtime, TickOutput};
use intent_ran::scenario::Scenario;
use intent_ran::sim::TrafficKind;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::{broadcast, oneshot};
use tracing::{error, info};

use crate::run::run_id_for;
use crate::store::{kpi_rows, KpiRow, RunWriter};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ServiceError {
    #[error("run {0} not found")]
    NotFound(String),
    #[error("run {0} is not live")]
    ServiceUnavailable(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("{0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Paused,
    Running,
    Stopped,
}

/// KPI rows of one strategic tick, as written to `kpis.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRows {
    pub tick: u64,
    pub apps: String,
    pub violations: usize,
    pub rows: Vec<KpiRow>,
}

/// Item of a run's server-push stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamItem {
    /// Position in the run's stream, starting at 1.
    pub id: u64,
    /// `pipeline`, `kpi` or `status`.
    pub kind: String,
    pub data: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub run_id: String,
    pub scenario: String,
    pub seed: u64,
    pub status: RunStatus,
    pub ticks: u64,
    pub max_ticks: Option<u64>,
    pub apps: String,
    pub queued_intents: usize,
    pub dir: PathBuf,
}

/// On/off span of one app; `to_tick` is open while the app stays on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppInterval {
    pub app: AppId,
    pub from_tick: u64,
    pub to_tick: Option<u64>,
}

pub fn app_intervals(timeline: &[AppChange]) -> Vec<AppInterval> {
    let mut out = Vec::new();
    for app in AppId::ALL {
        let mut open: Option<u64> = None;
        for c in timeline {
            match (c.apps.contains(app), open) {
                (true, None) => open = Some(c.tick),
                (false, Some(from)) => {
                    if c.tick > from {
                        out.push(AppInterval { app, from_tick: from, to_tick: Some(c.tick) });
                    }
                    open = None;
                }
                _ => {}
            }
        }
        if let Some(from) = open {
            out.push(AppInterval { app, from_tick: from, to_tick: None });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiSlice {
    pub from: u64,
    pub to: u64,
    /// Set when the requested window reached past the trace.
    pub clipped: bool,
    pub rows: Vec<TickRows>,
    pub timeline: Vec<AppChange>,
    pub intervals: Vec<AppInterval>,
}

/// Rows with tick in `[from, to)`, clipped to the trace.
pub fn slice(trace: &[TickRows], timeline: &[AppChange], from: u64, to: u64) -> KpiSlice {
    let len = trace.len() as u64;
    let to_eff = to.min(len);
    let from_eff = from.min(to_eff);
    KpiSlice {
        from: from_eff,
        to: to_eff,
        clipped: to > len || from > to_eff,
        rows: trace[from_eff as usize..to_eff as usize].to_vec(),
        timeline: timeline.to_vec(),
        intervals: app_intervals(timeline),
    }
}

/// Read side of a run, replaced under a short lock after every change.
struct View {
    info: RunInfo,
    trace: Vec<TickRows>,
    timeline: Vec<AppChange>,
    stream: Vec<StreamItem>,
}

pub struct RunShared {
    view: RwLock<View>,
    tx: broadcast::Sender<StreamItem>,
}

impl RunShared {
    pub fn info(&self) -> RunInfo {
        self.view.read().expect("view lock").info.clone()
    }

    pub fn kpis(&self, from: u64, to: u64) -> KpiSlice {
        let v = self.view.read().expect("view lock");
        slice(&v.trace, &v.timeline, from, to)
    }

    /// Stream items after `after`, plus a receiver for what follows.
    pub fn subscribe(&self, after: u64) -> (Vec<StreamItem>, broadcast::Receiver<StreamItem>) {
        let v = self.view.read().expect("view lock");
        // subscribing under the read lock keeps backlog and live items gap-free
        let rx = self.tx.subscribe();
        let backlog = v.stream.iter().filter(|i| i.id > after).cloned().collect();
        (backlog, rx)
    }

    fn push(&self, v: &mut View, kind: &str, data: Value) {
        let item = StreamItem { id: v.stream.len() as u64 + 1, kind: kind.into(), data };
        v.stream.push(item.clone());
        let _ = self.tx.send(item);
    }
}

enum Command {
    Start,
    Pause,
    Step(u64, oneshot::Sender<RunInfo>),
    Stop(oneshot::Sender<RunInfo>),
    Submit(String, Option<TrafficKind>, oneshot::Sender<PipelineEvent>),
    WhatIf(String, Option<TrafficKind>, oneshot::Sender<Value>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRun {
    /// Shipped scenario name.
    pub scenario: Option<String>,
    /// Inline scenario TOML; wins over `scenario`.
    pub config: Option<String>,
    pub seed: Option<u64>,
    /// Stop playing after this many ticks; `None` plays until paused.
    pub max_ticks: Option<u64>,
    /// Wall-clock pause between ticks while playing.
    #[serde(default = "default_interval")]
    pub tick_interval_ms: u64,
    #[serde(default)]
    pub validation_enabled: Option<bool>,
}

fn default_interval() -> u64 {
    100
}

struct Handle {
    shared: Arc<RunShared>,
    tx: Sender<Command>,
}

/// All live runs of a service instance.
pub struct Manager {
    data_dir: PathBuf,
    backend: Option<Arc<dyn LlmBackend>>,
    runs: Mutex<BTreeMap<String, Handle>>,
    next: Mutex<u64>,
}

impl Manager {
    pub fn new(data_dir: PathBuf, backend: Option<Arc<dyn LlmBackend>>) -> Self {
        Manager { data_dir, backend, runs: Mutex::new(BTreeMap::new()), next: Mutex::new(1) }
    }

    pub fn data_dir(&self) -> &std::path::Path {
        &self.data_dir
    }

    pub fn create(&self, req: CreateRun) -> Result<RunInfo, ServiceError> {
        let mut scenario = match (&req.config, &req.scenario) {
            (Some(text), _) => Scenario::from_toml(text).map_err(|e| ServiceError::BadRequest(e.to_string()))?,
            (None, Some(name)) => intent_ran::scenario::builtin(name)
                .ok_or_else(|| ServiceError::BadRequest(format!("unknown scenario {name}")))?,
            (None, None) => return Err(ServiceError::BadRequest("either scenario or config is required".into())),
        };
        if let Some(seed) = req.seed {
            scenario.sim.seed = seed;
        }
        if let Some(v) = req.validation_enabled {
            scenario.validation_enabled = v;
        }
        let config_text = scenario.to_toml();
        let run_id = {
            let mut n = self.next.lock().expect("counter lock");
            let id = format!("{}-{:04}", run_id_for(&config_text), *n);
            *n += 1;
            id
        };
        let dir = self.data_dir.join(&run_id);
        let rt = Runtime::new(scenario, shipped_examples())
            .map_err(|e| ServiceError::BadRequest(e.to_string()))?
            .with_backend(self.backend.clone());
        let (h, a) = rt.checkpoints();
        let s = rt.scenario();
        let mut writer = RunWriter::create(&dir, &run_id, &config_text, s.sim.seed, s.validation_enabled, (&h, &a))
            .map_err(|e| ServiceError::Internal(e.to_string()))?;
        writer.record_mut().scenario = s.name.clone();
        writer.write_record().map_err(|e| ServiceError::Internal(e.to_string()))?;
        let info = RunInfo {
            run_id: run_id.clone(),
            scenario: s.name.clone(),
            seed: s.sim.seed,
            status: RunStatus::Paused,
            ticks: 0,
            max_ticks: req.max_ticks,
            apps: rt.network().apps().enabled().to_string(),
            queued_intents: 0,
            dir,
        };
        let (btx, _) = broadcast::channel(1024);
        let shared = Arc::new(RunShared {
            view: RwLock::new(View { info: info.clone(), trace: Vec::new(), timeline: rt.timeline().to_vec(), stream: Vec::new() }),
            tx: btx,
        });
        let (tx, rx) = mpsc::channel();
        let actor = Actor {
            rt,
            writer: Some(writer),
            shared: shared.clone(),
            interval: Duration::from_millis(req.tick_interval_ms),
            max_ticks: req.max_ticks,
            playing: false,
        };
        thread::Builder::new()
            .name(run_id.clone())
            .spawn(move || actor.run(rx))
            .map_err(|e| ServiceError::Internal(e.to_string()))?;
        self.runs.lock().expect("runs lock").insert(run_id.clone(), Handle { shared, tx });
        info!(%run_id, "run created");
        Ok(info)
    }

    fn handle<T>(&self, id: &str, f: impl FnOnce(&Handle) -> T) -> Result<T, ServiceError> {
        let runs = self.runs.lock().expect("runs lock");
        runs.get(id).map(f).ok_or_else(|| ServiceError::NotFound(id.into()))
    }

    pub fn shared(&self, id: &str) -> Result<Arc<RunShared>, ServiceError> {
        self.handle(id, |h| h.shared.clone())
    }

    pub fn list(&self) -> Vec<RunInfo> {
        self.runs.lock().expect("runs lock").values().map(|h| h.shared.info()).collect()
    }

    fn send(&self, id: &str, cmd: Command) -> Result<(), ServiceError> {
        let tx = self.handle(id, |h| h.tx.clone())?;
        tx.send(cmd).map_err(|_| ServiceError::ServiceUnavailable(id.into()))
    }

    pub fn start(&self, id: &str) -> Result<RunInfo, ServiceError> {
        self.send(id, Command::Start)?;
        self.shared(id).map(|s| s.info())
    }

    pub fn pause(&self, id: &str) -> Result<RunInfo, ServiceError> {
        self.send(id, Command::Pause)?;
        self.shared(id).map(|s| s.info())
    }

    pub async fn step(&self, id: &str, n: u64) -> Result<RunInfo, ServiceError> {
        let (tx, rx) = oneshot::channel();
        self.send(id, Command::Step(n, tx))?;
        rx.await.map_err(|_| ServiceError::ServiceUnavailable(id.into()))
    }

    pub async fn stop(&self, id: &str) -> Result<RunInfo, ServiceError> {
        let shared = self.shared(id)?;
        let (tx, rx) = oneshot::channel();
        if self.send(id, Command::Stop(tx)).is_err() {
            return Ok(shared.info());
        }
        Ok(rx.await.unwrap_or_else(|_| shared.info()))
    }

    pub async fn submit(&self, id: &str, text: String, class: Option<TrafficKind>) -> Result<PipelineEvent, ServiceError> {
        let (tx, rx) = oneshot::channel();
        self.send(id, Command::Submit(text, class, tx))?;
        rx.await.map_err(|_| ServiceError::ServiceUnavailable(id.into()))
    }

    pub async fn what_if(&self, id: &str, text: String, class: Option<TrafficKind>) -> Result<Value, ServiceError> {
        let (tx, rx) = oneshot::channel();
        self.send(id, Command::WhatIf(text, class, tx))?;
        rx.await.map_err(|_| ServiceError::ServiceUnavailable(id.into()))
    }
}

struct Actor {
    rt: Runtime,
    writer: Option<RunWriter>,
    shared: Arc<RunShared>,
    interval: Duration,
    max_ticks: Option<u64>,
    playing: bool,
}

impl Actor {
    fn run(mut self, rx: Receiver<Command>) {
        loop {
            let cmd = if self.playing {
                match rx.recv_timeout(self.interval) {
                    Ok(c) => Some(c),
                    Err(RecvTimeoutError::Timeout) => None,
                    Err(RecvTimeoutError::Disconnected) => break,
                }
            } else {
                match rx.recv() {
                    Ok(c) => Some(c),
                    Err(_) => break,
                }
            };
            match cmd {
                Some(Command::Stop(reply)) => {
                    self.stop();
                    let _ = reply.send(self.shared.info());
                    return;
                }
                Some(c) => self.handle(c),
                None => {
                    if self.playing {
                        self.tick();
                    }
                }
            }
            // drain whatever else arrived without blocking
            loop {
                match rx.try_recv() {
                    Ok(Command::Stop(reply)) => {
                        self.stop();
                        let _ = reply.send(self.shared.info());
                        return;
                    }
                    Ok(c) => self.handle(c),
                    Err(TryRecvError::Empty) => break,
                    Err(TryRecvError::Disconnected) => {
                        self.stop();
                        return;
                    }
                }
            }
        }
        self.stop();
    }

    fn handle(&mut self, cmd: Command) {
        match cmd {
            Command::Start => self.set_playing(true),
            Command::Pause => self.set_playing(false),
            Command::Step(n, reply) => {
                self.set_playing(false);
                for _ in 0..n {
                    self.tick();
                }
                let _ = reply.send(self.shared.info());
            }
            Command::Submit(text, class, reply) => {
                let ev = self.rt.submit_intent(&text, class);
                self.flush_pending();
                let _ = reply.send(ev);
            }
            Command::WhatIf(text, class, reply) => {
                let _ = reply.send(self.rt.what_if(&text, class));
            }
            Command::Stop(_) => unreachable!("handled by the loop"),
        }
    }

    fn set_playing(&mut self, on: bool) {
        let on = on && self.max_ticks.is_none_or(|m| self.rt.ticks() < m);
        if self.playing == on {
            return;
        }
        self.playing = on;
        self.publish_status(if on { RunStatus::Running } else { RunStatus::Paused });
    }

    fn publish_status(&self, status: RunStatus) {
        let mut v = self.shared.view.write().expect("view lock");
        v.info.status = status;
        v.info.queued_intents = self.rt.queued();
        let data = json!({ "status": status, "ticks": v.info.ticks });
        self.shared.push(&mut v, "status", data);
    }

    fn flush_pending(&mut self) {
        let (events, records) = self.rt.take_pending();
        if let Some(w) = &mut self.writer {
            if let Err(e) = w.append_pending(&events, &records) {
                error!(error = %e, "persisting events failed");
            }
        }
        let mut v = self.shared.view.write().expect("view lock");
        v.info.queued_intents = self.rt.queued();
        for e in events {
            self.shared.push(&mut v, "pipeline", serde_json::to_value(e).expect("serialisable"));
        }
    }

    fn tick(&mut self) {
        let out: TickOutput = self.rt.step_tick();
        if let Some(w) = &mut self.writer {
            if let Err(e) = w.append_tick(&out, self.rt.timeline()) {
                error!(error = %e, "persisting tick failed");
            }
        }
        let rows = TickRows { tick: out.tick, apps: out.apps.to_string(), violations: out.violations, rows: kpi_rows(&out) };
        {
            let mut v = self.shared.view.write().expect("view lock");
            for e in &out.events {
                self.shared.push(&mut v, "pipeline", serde_json::to_value(e).expect("serialisable"));
            }
            self.shared.push(&mut v, "kpi", serde_json::to_value(&rows).expect("serialisable"));
            v.trace.push(rows);
            v.timeline = self.rt.timeline().to_vec();
            v.info.ticks = self.rt.ticks();
            v.info.apps = self.rt.network().apps().enabled().to_string();
            v.info.queued_intents = self.rt.queued();
        }
        if self.playing && self.max_ticks.is_some_and(|m| self.rt.ticks() >= m) {
            self.set_playing(false);
        }
    }

    fn stop(&mut self) {
        if let Some(w) = self.writer.take() {
            let (h, a) = self.rt.checkpoints();
            if let Err(e) = w.finish((&h, &a)) {
                error!(error = %e, "finalising run failed");
            }
        }
        self.playing = false;
        self.publish_status(RunStatus::Stopped);
    }
}
