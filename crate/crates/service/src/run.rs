//! Headless runs and their replay.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use intent_ran::apps::AppCheckpoint;
use intent_ran::hrl::HrlCheckpoint;
use intent_ran::intent::{shipped_examples, HttpBackend, LlmBackend, LlmBackendConfig};
use intent_ran::runtime::{QueuedIntent, Runtime};
use intent_ran::scenario::{builtin, Scenario, ScheduledIntent};
use serde::Serialize;
use tracing::{info, warn};

use crate::store::{self, RunRecord, RunWriter};

/// A shipped scenario name or a path to a TOML file.
pub fn load_scenario(arg: &str) -> anyhow::Result<Scenario> {
    if let Some(s) = builtin(arg) {
        return Ok(s);
    }
    let text = fs::read_to_string(arg).with_context(|| format!("no shipped scenario or readable file named {arg}"))?;
    Scenario::from_toml(&text).with_context(|| format!("{arg}"))
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub ticks: Option<u64>,
    pub validation_enabled: Option<bool>,
    pub intents: Vec<ScheduledIntent>,
}

impl Overrides {
    pub fn apply(&self, mut s: Scenario) -> Scenario {
        if let Some(seed) = self.seed {
            s.sim.seed = seed;
        }
        if let Some(t) = self.ticks {
            s.ticks = t;
        }
        if let Some(v) = self.validation_enabled {
            s.validation_enabled = v;
        }
        s.intents.extend(self.intents.iter().cloned());
        s.intents.sort_by_key(|i| i.at_tick);
        s
    }
}

/// HTTP back-end from the environment, if one is configured.
pub fn backend_from_env() -> Option<Arc<dyn LlmBackend>> {
    let cfg = LlmBackendConfig::from_env()?;
    match HttpBackend::new(cfg) {
        Ok(b) => Some(Arc::new(b)),
        Err(e) => {
            warn!(error = %e, "ignoring back-end configuration");
            None
        }
    }
}

pub fn run_id_for(config_text: &str) -> String {
    format!("run-{}", &store::config_hash(config_text)[..12])
}

/// Runs `scenario` for its configured ticks and writes a run directory.
pub fn run_headless(
    scenario: Scenario,
    hrl: Option<&HrlCheckpoint>,
    out: &Path,
    backend: Option<Arc<dyn LlmBackend>>,
) -> anyhow::Result<RunRecord> {
    let config_text = scenario.to_toml();
    let ticks = scenario.ticks;
    let mut rt = Runtime::new(scenario, shipped_examples())?.with_backend(backend);
    if let Some(h) = hrl {
        let apps = rt.network().apps().checkpoint();
        rt.restore(h, &apps)?;
    }
    let mut w = open_writer(&rt, out, &run_id_for(&config_text), &config_text)?;
    for _ in 0..ticks {
        let o = rt.step_tick();
        w.append_tick(&o, rt.timeline())?;
    }
    let (h, a) = rt.checkpoints();
    let rec = w.finish((&h, &a))?;
    info!(dir = %out.display(), ticks, "run complete");
    Ok(rec)
}

fn open_writer(rt: &Runtime, out: &Path, run_id: &str, config_text: &str) -> anyhow::Result<RunWriter> {
    let (h, a) = rt.checkpoints();
    let s = rt.scenario();
    let mut w = RunWriter::create(out, run_id, config_text, s.sim.seed, s.validation_enabled, (&h, &a))?;
    w.record_mut().scenario = s.name.clone();
    w.write_record()?;
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileMatch {
    pub file: String,
    pub identical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    pub replay_dir: PathBuf,
    pub ticks: u64,
    pub files: Vec<FileMatch>,
}

impl ReplayReport {
    pub fn identical(&self) -> bool {
        self.files.iter().all(|f| f.identical)
    }
}

/// Re-executes a persisted run from its config, initial checkpoints and
/// intent submissions, writing into `<run-dir>/replay` and comparing files.
pub fn replay(dir: &Path, backend: Option<Arc<dyn LlmBackend>>) -> anyhow::Result<ReplayReport> {
    let rec = store::read_record(dir)?;
    let config_text = fs::read_to_string(dir.join(store::CONFIG))?;
    if store::config_hash(&config_text) != rec.config_hash {
        bail!("config does not match the hash recorded in {}", store::RECORD);
    }
    let mut scenario = Scenario::from_toml(&config_text)?;
    scenario.intents.clear();
    let hrl = HrlCheckpoint::from_json(&fs::read_to_string(dir.join(&rec.checkpoints.hrl_initial))?)?;
    let apps = AppCheckpoint::from_json(&fs::read_to_string(dir.join(&rec.checkpoints.apps_initial))?)?;
    let submissions: Vec<QueuedIntent> = store::read_jsonl::<intent_ran::runtime::IntentRecord>(&dir.join(store::INTENTS))?
        .into_iter()
        .filter(|r| r.kind == "received")
        .map(|r| serde_json::from_value(r.detail))
        .collect::<Result<_, _>>()?;

    let mut rt = Runtime::new(scenario, shipped_examples())?.with_backend(backend);
    rt.restore(&hrl, &apps)?;
    let out = dir.join("replay");
    if out.exists() {
        fs::remove_dir_all(&out)?;
    }
    let mut w = open_writer(&rt, &out, &rec.run_id, &config_text)?;
    let submit_due = |rt: &mut Runtime, w: &mut RunWriter, tick: u64| -> anyhow::Result<()> {
        for q in submissions.iter().filter(|q| q.submitted_tick == tick) {
            rt.submit_intent(&q.text, q.target_class);
        }
        let (ev, recs) = rt.take_pending();
        w.append_pending(&ev, &recs)
    };
    for t in 0..rec.ticks {
        submit_due(&mut rt, &mut w, t)?;
        let o = rt.step_tick();
        w.append_tick(&o, rt.timeline())?;
    }
    submit_due(&mut rt, &mut w, rec.ticks)?;
    let (h, a) = rt.checkpoints();
    w.finish((&h, &a))?;

    let mut files = Vec::new();
    for f in [store::KPIS, store::EVENTS, store::INTENTS, store::TRAFFIC] {
        let a = fs::read(dir.join(f)).with_context(|| f.to_string())?;
        let b = fs::read(out.join(f))?;
        files.push(FileMatch { file: f.into(), identical: a == b });
    }
    if let Some(final_ref) = &rec.checkpoints.hrl_final {
        let a = fs::read(dir.join(final_ref))?;
        let b = fs::read(out.join(final_ref))?;
        files.push(FileMatch { file: final_ref.clone(), identical: a == b });
    }
    Ok(ReplayReport { replay_dir: out, ticks: rec.ticks, files })
}
