//! Composition of the enabled applications into per-slot controls.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::sim::controls::{BeamChoice, PowerChoice, Steering};
use crate::sim::{traffic, AppControls, NetworkState, Radio, Simulator};

use super::steering::TABLE_LEN;
use super::{
    AppError, AppId, AppSet, Beamforming, CellSleeping, HandoverManager, PowerAllocation, SleepParams,
    SteeringParams, TrafficSteering,
};

pub const APP_CHECKPOINT_VERSION: u32 = 1;

const STREAM_APPS: u64 = 0x0A00;

/// What the apps see while planning: the network state plus attachments
/// and activity as already modified by earlier apps in the same round.
pub(crate) struct Plan<'a> {
    pub state: &'a NetworkState,
    pub radio: Radio<'a>,
    pub active: Vec<bool>,
    pub serving: Vec<Option<usize>>,
    pub powers_dbm: Vec<f64>,
    /// Whether beam gains should be assumed on the beamformed layer.
    pub beams_on: bool,
}

impl<'a> Plan<'a> {
    fn new(sim: &'a Simulator, sleep: &[usize], beams_on: bool) -> Self {
        let state = sim.state();
        let radio = sim.radio();
        let active: Vec<bool> = (0..radio.num_bs()).map(|b| !sleep.contains(&b)).collect();
        let serving = state
            .ues
            .iter()
            .map(|u| match u.serving {
                Some(s) if active[s] => Some(s),
                _ => radio.best_rsrp_bs(u.id, |b| active[b]),
            })
            .collect();
        let powers_dbm = state.bss.iter().map(|b| b.tx_power_dbm).collect();
        Plan { state, radio, active, serving, powers_dbm, beams_on }
    }

    /// Full-buffer SINR estimate of `u` on `b`, linear.
    pub fn sinr_estimate(&self, u: usize, b: usize) -> f64 {
        let beam = if self.beams_on { self.radio.best_beam_gain_db(b, u) } else { 0.0 };
        self.radio.sinr_linear(u, b, &self.powers_dbm, &self.active, beam)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppParams {
    pub steering: SteeringParams,
    pub sleep: SleepParams,
    /// Slots between tactical decisions; outputs are held in between.
    pub tactical_period: u64,
}

impl Default for AppParams {
    fn default() -> Self {
        AppParams { steering: SteeringParams::default(), sleep: SleepParams::default(), tactical_period: 10 }
    }
}

/// Learned state of the applications, versioned for checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppCheckpoint {
    pub version: u32,
    pub steering_q: Vec<f64>,
    pub steering_decisions: u64,
}

impl AppCheckpoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serialises")
    }

    pub fn from_json(s: &str) -> Result<Self, AppError> {
        let c: AppCheckpoint = serde_json::from_str(s).map_err(|e| AppError::Checkpoint(e.to_string()))?;
        if c.version != APP_CHECKPOINT_VERSION {
            return Err(AppError::Checkpoint(format!("unsupported version {}", c.version)));
        }
        if c.steering_q.len() != TABLE_LEN || c.steering_q.iter().any(|v| !v.is_finite()) {
            return Err(AppError::Checkpoint("steering table has the wrong shape".into()));
        }
        Ok(c)
    }
}

/// Holds the five apps and turns the enabled subset into slot controls.
#[derive(Debug, Clone)]
pub struct AppSuite {
    params: AppParams,
    steering: TrafficSteering,
    sleeping: CellSleeping,
    enabled: AppSet,
    rng: ChaCha8Rng,
    dirty: bool,
    sleep: Vec<usize>,
    beams: Vec<BeamChoice>,
    power: Vec<PowerChoice>,
    served_acc: Vec<f64>,
    acc_slots: u64,
    rejected: u64,
}

impl AppSuite {
    pub fn new(seed: u64, params: AppParams) -> Self {
        AppSuite {
            params,
            steering: TrafficSteering::new(params.steering),
            sleeping: CellSleeping::new(params.sleep),
            enabled: AppSet::EMPTY,
            rng: traffic::stream(seed, STREAM_APPS),
            dirty: true,
            sleep: Vec::new(),
            beams: Vec::new(),
            power: Vec::new(),
            served_acc: Vec::new(),
            acc_slots: 0,
            rejected: 0,
        }
    }

    pub fn params(&self) -> &AppParams {
        &self.params
    }

    pub fn enabled(&self) -> AppSet {
        self.enabled
    }

    /// Switches the active app set; takes effect at the next slot.
    pub fn set_enabled(&mut self, apps: AppSet) {
        if apps == self.enabled {
            return;
        }
        if !apps.contains(AppId::App1) {
            self.steering.reset_pending();
        }
        self.enabled = apps;
        self.dirty = true;
    }

    pub fn steering(&self) -> &TrafficSteering {
        &self.steering
    }

    /// Controls stripped for referencing a sleeping BS, in total.
    pub fn rejected_controls(&self) -> u64 {
        self.rejected
    }

    pub fn checkpoint(&self) -> AppCheckpoint {
        AppCheckpoint {
            version: APP_CHECKPOINT_VERSION,
            steering_q: self.steering.table().to_vec(),
            steering_decisions: self.steering.decisions(),
        }
    }

    pub fn restore(&mut self, c: &AppCheckpoint) -> Result<(), AppError> {
        let c = AppCheckpoint::from_json(&c.to_json())?;
        self.steering.restore(c.steering_q, c.steering_decisions);
        self.dirty = true;
        Ok(())
    }

    /// Output of a single enabled app against the current state, without
    /// touching the cached controls of the running composition.
    pub fn app_act(&mut self, app: AppId, sim: &Simulator) -> Result<AppControls, AppError> {
        if !self.enabled.contains(app) {
            return Err(AppError::Disabled(app));
        }
        let mut out = AppControls::default();
        if sim.state().ues.is_empty() {
            return Ok(out);
        }
        let mut plan = Plan::new(sim, &self.sleep, self.enabled.contains(AppId::App3));
        match app {
            AppId::App1 => {
                let served = self.served_or_zero(sim);
                let period = self.period_s(sim);
                let mut s = self.steering.clone();
                let mut rng = self.rng.clone();
                out.steering = s.act(&mut plan, &served, period, &mut rng);
            }
            AppId::App2 => out.sleep = self.sleeping.act(sim.state()),
            AppId::App3 => out.beams = Beamforming.act(&plan),
            AppId::App4 => out.power = PowerAllocation.act(&plan),
            AppId::App5 => out.handovers = HandoverManager.act(&mut plan),
        }
        out.enforce_sleep_safety();
        Ok(out)
    }

    fn served_or_zero(&self, sim: &Simulator) -> Vec<f64> {
        let n = sim.state().ues.len();
        if self.served_acc.len() == n { self.served_acc.clone() } else { vec![0.0; n] }
    }

    fn period_s(&self, sim: &Simulator) -> f64 {
        self.acc_slots.max(1) as f64 * sim.config().slot_duration_s
    }

    /// Controls for the slot `sim` is about to execute.
    pub fn controls(&mut self, sim: &Simulator) -> AppControls {
        let slot = sim.slot();
        let strategic = slot % sim.config().strategic_every == 0 || self.dirty;
        let tactical = strategic || slot % self.params.tactical_period.max(1) == 0;
        let apps = self.enabled;
        if strategic {
            self.sleep = if apps.contains(AppId::App2) { self.sleeping.act(sim.state()) } else { Vec::new() };
        }
        let mut out = AppControls { sleep: self.sleep.clone(), ..AppControls::default() };
        if tactical {
            let mut plan = Plan::new(sim, &self.sleep, apps.contains(AppId::App3));
            if strategic && !apps.contains(AppId::App1) && !apps.contains(AppId::App5) {
                // default attachment: strongest active cell
                for u in 0..plan.serving.len() {
                    let best = plan.radio.best_rsrp_bs(u, |b| plan.active[b]);
                    if let Some(b) = best {
                        if sim.state().ues[u].serving != Some(b) {
                            out.steering.push(Steering { ue: u, bs: b });
                        }
                        plan.serving[u] = Some(b);
                    }
                }
            }
            if apps.contains(AppId::App1) {
                let served = self.served_or_zero(sim);
                let period = self.period_s(sim);
                out.steering.extend(self.steering.act(&mut plan, &served, period, &mut self.rng));
            }
            if apps.contains(AppId::App5) {
                out.handovers = HandoverManager.act(&mut plan);
            }
            self.beams = if apps.contains(AppId::App3) { Beamforming.act(&plan) } else { Vec::new() };
            self.power = if apps.contains(AppId::App4) { PowerAllocation.act(&plan) } else { Vec::new() };
            self.served_acc = vec![0.0; sim.state().ues.len()];
            self.acc_slots = 0;
            self.dirty = false;
        }
        out.beams = self.beams.clone();
        out.power = self.power.clone();
        self.rejected += out.enforce_sleep_safety() as u64;
        out
    }

    /// Feeds the state reached after a slot back to the learning apps.
    pub fn observe(&mut self, state: &NetworkState) {
        if self.served_acc.len() != state.ues.len() {
            return;
        }
        for (acc, u) in self.served_acc.iter_mut().zip(&state.ues) {
            *acc += u.served_bits;
        }
        self.acc_slots += 1;
    }
}
