//! The intent pipeline driven tick by tick over a live network.

use std::collections::VecDeque;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::apps::{AppCheckpoint, AppSet};
use crate::hrl::{compute_rewards, intent_to_goal, Extrinsic, Goal, HrlAgent, HrlCheckpoint, HrlError, StateSummary, Transition};
use crate::intent::{classify_and_extract, IntentExample, LlmBackend, ProcessedIntent};
use crate::network::Network;
use crate::scenario::{Scenario, ScenarioError};
use crate::sim::{traffic, KpiSnapshot, TrafficKind};
use crate::validation::{predict_traffic, validate, Branch, SeasonalNaive, ValidationConfig};

const STREAM_CONTROLLER: u64 = 0xC0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineStep {
    Received,
    Processed,
    Validated,
    GoalIssued,
    ActionSelected,
    AppsApplied,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineEvent {
    /// Run-wide sequence number, starting at 1.
    pub seq: u64,
    pub intent_id: u64,
    /// Strategic ticks completed when the event was emitted.
    pub tick: u64,
    /// Simulated time of emission, seconds.
    pub time_s: f64,
    pub step: PipelineStep,
    /// False on the rejection that ends an intent's stream.
    pub ok: bool,
    pub payload: Value,
}

impl PipelineEvent {
    pub fn is_terminal_rejection(&self) -> bool {
        !self.ok
    }
}

/// When an app set took effect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppChange {
    pub tick: u64,
    pub apps: AppSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueuedIntent {
    pub id: u64,
    pub text: String,
    pub target_class: Option<TrafficKind>,
    /// Tick count at submission.
    pub submitted_tick: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveOption {
    pub intent_id: u64,
    pub goal: Goal,
    pub start_state: usize,
    pub state: usize,
    pub action: AppSet,
    pub extrinsic: Extrinsic,
}

/// Structured record of what became of an intent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentRecord {
    pub intent_id: u64,
    pub tick: u64,
    pub kind: String,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickOutput {
    /// Index of the tick that just ran.
    pub tick: u64,
    pub end_slot: u64,
    pub kpi: KpiSnapshot,
    /// App set that ran during the tick.
    pub apps: AppSet,
    pub violations: usize,
    pub events: Vec<PipelineEvent>,
    pub records: Vec<IntentRecord>,
}

pub struct Runtime {
    scenario: Scenario,
    net: Network,
    agent: HrlAgent,
    forecaster: SeasonalNaive,
    thresholds: ValidationConfig,
    examples: Vec<IntentExample>,
    backend: Option<Arc<dyn LlmBackend>>,
    history: Vec<f64>,
    last_kpi: Option<KpiSnapshot>,
    queue: VecDeque<QueuedIntent>,
    active: Option<ActiveOption>,
    timeline: Vec<AppChange>,
    rng: ChaCha8Rng,
    ticks: u64,
    next_intent: u64,
    next_seq: u64,
    /// Events and records emitted outside `step_tick`, flushed with the next tick.
    outbox: Vec<PipelineEvent>,
    records_out: Vec<IntentRecord>,
}

impl Runtime {
    pub fn new(scenario: Scenario, examples: Vec<IntentExample>) -> Result<Self, ScenarioError> {
        scenario.check()?;
        let invalid = |e: String| ScenarioError::Invalid(e);
        let profiles = scenario.qos.profiles()?;
        let mut net = Network::new(scenario.sim.clone(), &scenario.traffic, scenario.apps, profiles)
            .map_err(|e| invalid(e.to_string()))?;
        let baseline = scenario.baseline()?;
        net.set_apps(baseline);
        let agent = HrlAgent::new(scenario.hrl.clone()).map_err(|e| invalid(e.to_string()))?;
        Ok(Runtime {
            forecaster: scenario.forecast,
            thresholds: scenario.validation,
            rng: traffic::stream(scenario.sim.seed, STREAM_CONTROLLER),
            timeline: vec![AppChange { tick: 0, apps: baseline }],
            scenario,
            net,
            agent,
            examples,
            backend: None,
            history: Vec::new(),
            last_kpi: None,
            queue: VecDeque::new(),
            active: None,
            ticks: 0,
            next_intent: 1,
            next_seq: 1,
            outbox: Vec::new(),
            records_out: Vec::new(),
        })
    }

    pub fn with_backend(mut self, backend: Option<Arc<dyn LlmBackend>>) -> Self {
        self.backend = backend;
        self
    }

    /// Loads learned tables; only allowed before the first tick.
    pub fn restore(&mut self, hrl: &HrlCheckpoint, apps: &AppCheckpoint) -> Result<(), ScenarioError> {
        if self.ticks > 0 {
            return Err(ScenarioError::Invalid("checkpoints can only be loaded before the first tick".into()));
        }
        self.agent.restore(hrl)?;
        self.net.apps_mut().restore(apps).map_err(|e| ScenarioError::Invalid(e.to_string()))
    }

    pub fn checkpoints(&self) -> (HrlCheckpoint, AppCheckpoint) {
        (self.agent.checkpoint(), self.net.apps().checkpoint())
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn agent(&self) -> &HrlAgent {
        &self.agent
    }

    pub fn agent_mut(&mut self) -> &mut HrlAgent {
        &mut self.agent
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    pub fn timeline(&self) -> &[AppChange] {
        &self.timeline
    }

    pub fn thresholds(&self) -> &ValidationConfig {
        &self.thresholds
    }

    pub fn active_option(&self) -> Option<&ActiveOption> {
        self.active.as_ref()
    }

    pub fn traffic_history(&self) -> &[f64] {
        &self.history
    }

    pub fn last_kpi(&self) -> Option<&KpiSnapshot> {
        self.last_kpi.as_ref()
    }

    fn now_s(&self) -> f64 {
        self.ticks as f64 * self.scenario.sim.strategic_tick_s()
    }

    fn event(&mut self, intent_id: u64, step: PipelineStep, ok: bool, payload: Value) -> PipelineEvent {
        let e = PipelineEvent { seq: self.next_seq, intent_id, tick: self.ticks, time_s: self.now_s(), step, ok, payload };
        self.next_seq += 1;
        e
    }

    fn record(&mut self, intent_id: u64, kind: &str, detail: Value) {
        self.records_out.push(IntentRecord { intent_id, tick: self.ticks, kind: kind.into(), detail });
    }

    /// Queues an intent; it is processed at the next strategic tick.
    pub fn submit_intent(&mut self, text: &str, target_class: Option<TrafficKind>) -> PipelineEvent {
        let id = self.next_intent;
        self.next_intent += 1;
        let q = QueuedIntent { id, text: text.to_string(), target_class, submitted_tick: self.ticks };
        let ev = self.event(id, PipelineStep::Received, true, json!({ "text": text, "target_class": target_class }));
        self.record(id, "received", serde_json::to_value(&q).expect("serialisable"));
        self.queue.push_back(q);
        self.outbox.push(ev.clone());
        ev
    }

    /// Events and records emitted since the last tick, e.g. by `submit_intent`.
    pub fn take_pending(&mut self) -> (Vec<PipelineEvent>, Vec<IntentRecord>) {
        (std::mem::take(&mut self.outbox), std::mem::take(&mut self.records_out))
    }

    pub fn queued(&self) -> usize {
        self.queue.len()
    }

    /// Read-only validation of `text` against the current state.
    pub fn what_if(&self, text: &str, target_class: Option<TrafficKind>) -> Value {
        let intent = match classify_and_extract(text, &self.examples, self.backend.as_deref()) {
            Ok(mut p) => {
                p.target_class = target_class;
                p
            }
            Err(e) => return json!({ "stage": "processed", "error": e.to_string() }),
        };
        match self.validate_intent(&intent) {
            Ok(v) => json!({ "stage": "validated", "verdict": v }),
            Err(e) => json!({ "stage": "validated", "intent": intent, "error": e }),
        }
    }

    fn validate_intent(&self, intent: &ProcessedIntent) -> Result<crate::validation::ValidationVerdict, String> {
        let kpi = self.last_kpi.as_ref().ok_or("no measurements yet")?;
        let forecast = predict_traffic(&self.forecaster, &self.history).map_err(|e| e.to_string())?;
        validate(intent, &forecast, &self.thresholds, kpi, self.net.profiles(), &self.history).map_err(|e| e.to_string())
    }

    fn apply(&mut self, apps: AppSet) -> Option<AppSet> {
        let prev = self.net.apps().enabled();
        if prev == apps {
            return None;
        }
        self.net.set_apps(apps);
        self.timeline.push(AppChange { tick: self.ticks, apps });
        Some(prev)
    }

    /// Runs steps 2 to 6 for one queued intent; returns true if it led to an option.
    fn run_pipeline(&mut self, q: QueuedIntent, events: &mut Vec<PipelineEvent>) -> bool {
        let id = q.id;
        let mut intent = match classify_and_extract(&q.text, &self.examples, self.backend.as_deref()) {
            Ok(p) => p,
            Err(e) => {
                events.push(self.event(id, PipelineStep::Processed, false, json!({ "error": e.to_string() })));
                self.record(id, "rejected", json!({ "step": "processed", "error": e.to_string() }));
                return false;
            }
        };
        intent.target_class = q.target_class;
        events.push(self.event(id, PipelineStep::Processed, true, serde_json::to_value(&intent).expect("serialisable")));

        if self.scenario.validation_enabled {
            match self.validate_intent(&intent) {
                Ok(v) => {
                    if v.branch == Branch::ThresholdsRecomputed {
                        self.thresholds = v.thresholds;
                    }
                    let payload = serde_json::to_value(&v).expect("serialisable");
                    events.push(self.event(id, PipelineStep::Validated, v.valid, payload.clone()));
                    self.record(id, "verdict", payload);
                    if !v.valid {
                        return false;
                    }
                }
                Err(e) => {
                    events.push(self.event(id, PipelineStep::Validated, false, json!({ "error": e })));
                    self.record(id, "rejected", json!({ "step": "validated", "error": e }));
                    return false;
                }
            }
        } else {
            let payload = json!({ "valid": true, "skipped": true, "intent": intent });
            events.push(self.event(id, PipelineStep::Validated, true, payload.clone()));
            self.record(id, "verdict", payload);
        }

        let kpi = self.last_kpi.clone().expect("validated intents have a measurement");
        let goal = match intent_to_goal(&intent, &kpi, self.agent.cfg.deadline) {
            Ok(g) => g,
            Err(e) => {
                events.push(self.event(id, PipelineStep::GoalIssued, false, json!({ "error": e.to_string() })));
                self.record(id, "rejected", json!({ "step": "goal_issued", "error": e.to_string() }));
                return false;
            }
        };
        let s = StateSummary::of(self.net.sim().state());
        let filtering = self.agent.filtered(&s, goal.kpi);
        let names: Vec<String> = filtering.set.actions.iter().map(|a| a.to_string()).collect();
        events.push(self.event(
            id,
            PipelineStep::GoalIssued,
            true,
            json!({
                "goal": goal,
                "filtered_actions": names,
                "fallback": filtering.set.fallback,
                "scorer_unavailable": filtering.scorer_unavailable,
            }),
        ));
        let eps = self.agent.cfg.runtime_epsilon;
        let action = self.agent.q.select_action(s.bucket(), goal.index(), &filtering.set, eps, &mut self.rng);
        events.push(self.event(
            id,
            PipelineStep::ActionSelected,
            true,
            json!({ "action": action.to_string(), "index": action.index(), "epsilon2": eps }),
        ));
        let prev = self.apply(action).unwrap_or(action);
        events.push(self.event(
            id,
            PipelineStep::AppsApplied,
            true,
            json!({ "apps": action.to_string(), "previous": prev.to_string() }),
        ));
        self.active = Some(ActiveOption {
            intent_id: id,
            goal,
            start_state: s.bucket(),
            state: s.bucket(),
            action,
            extrinsic: Extrinsic::default(),
        });
        true
    }

    /// Learns from the tick that just ran and ends or continues the option.
    fn advance_option(&mut self, kpi: &KpiSnapshot, violations: usize, events: &mut Vec<PipelineEvent>) {
        let Some(mut opt) = self.active.take() else { return };
        let achieved = kpi.value(opt.goal.kpi);
        let r = match compute_rewards(&opt.goal, achieved, violations, self.agent.cfg.penalty) {
            Ok(r) => r,
            Err(e) => {
                self.record(opt.intent_id, "option_aborted", json!({ "error": e.to_string() }));
                return;
            }
        };
        opt.extrinsic.push(r.r_in);
        let s_next = StateSummary::of(self.net.sim().state());
        let filtering = self.agent.filtered(&s_next, opt.goal.kpi);
        let reached = opt.goal.reached(achieved);
        let deadline = opt.extrinsic.steps >= opt.goal.deadline;
        let terminal = reached || deadline;
        let g = opt.goal.index();
        let t = Transition { s: opt.state, g, a: opt.action, r_in: r.r_in, s_next: s_next.bucket(), terminal };
        self.agent.q.q_update(&t, &filtering.set.actions);
        self.record(opt.intent_id, "reward", serde_json::to_value(r).expect("serialisable"));
        if terminal {
            self.agent.meta.update(opt.start_state, g, opt.extrinsic.sum);
            self.record(
                opt.intent_id,
                "option_terminated",
                json!({ "reached": reached, "extrinsic": opt.extrinsic.sum, "ticks": opt.extrinsic.steps, "apps": opt.action.to_string() }),
            );
            return;
        }
        let eps = self.agent.cfg.runtime_epsilon;
        let action = self.agent.q.select_action(s_next.bucket(), g, &filtering.set, eps, &mut self.rng);
        if action != opt.action {
            events.push(self.event(
                opt.intent_id,
                PipelineStep::ActionSelected,
                true,
                json!({ "action": action.to_string(), "index": action.index(), "epsilon2": eps }),
            ));
            let prev = self.apply(action).unwrap_or(action);
            events.push(self.event(
                opt.intent_id,
                PipelineStep::AppsApplied,
                true,
                json!({ "apps": action.to_string(), "previous": prev.to_string() }),
            ));
        }
        opt.state = s_next.bucket();
        opt.action = action;
        self.active = Some(opt);
    }

    /// Injects scheduled intents, serves the intent queue, runs one
    /// strategic tick and updates the controller.
    pub fn step_tick(&mut self) -> TickOutput {
        let due: Vec<_> = self.scenario.intents.iter().filter(|i| i.at_tick == self.ticks).cloned().collect();
        for i in due {
            self.submit_intent(&i.text, i.target_class);
        }
        let mut events = std::mem::take(&mut self.outbox);
        while self.active.is_none() {
            let Some(q) = self.queue.pop_front() else { break };
            self.run_pipeline(q, &mut events);
        }

        let report = self.net.run_tick();
        let ran = self.net.apps().enabled();
        self.ticks += 1;
        self.history.push(report.kpi.offered_bps);
        let violations = self.net.violations(&report);
        self.advance_option(&report.kpi, violations, &mut events);
        self.last_kpi = Some(report.kpi.clone());
        TickOutput {
            tick: report.tick,
            end_slot: report.end_slot,
            kpi: report.kpi,
            apps: ran,
            violations,
            events,
            records: std::mem::take(&mut self.records_out),
        }
    }
}

impl std::fmt::Debug for Runtime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Runtime").field("scenario", &self.scenario.name).field("ticks", &self.ticks).finish()
    }
}

impl From<HrlError> for ScenarioError {
    fn from(e: HrlError) -> Self {
        ScenarioError::Invalid(e.to_string())
    }
}
