//! A simulator bundled with its application suite and QoS profiles.

use crate::apps::{AppParams, AppSet, AppSuite};
use crate::hrl::count_violations;
use crate::sim::{
    AppControls, QosProfiles, SimConfig, SimError, Simulator, SlotOutcome, TickReport, TrafficConfig, TrafficKind,
};

#[derive(Debug, Clone)]
pub struct Network {
    sim: Simulator,
    apps: AppSuite,
    profiles: QosProfiles,
    classes: Vec<TrafficKind>,
}

impl Network {
    pub fn new(
        cfg: SimConfig,
        traffic: &TrafficConfig,
        app_params: AppParams,
        profiles: QosProfiles,
    ) -> Result<Self, SimError> {
        let seed = cfg.seed;
        let sim = Simulator::new(cfg, traffic)?;
        let classes = sim.state().ues.iter().map(|u| u.class).collect();
        Ok(Network { sim, apps: AppSuite::new(seed, app_params), profiles, classes })
    }

    pub fn sim(&self) -> &Simulator {
        &self.sim
    }

    pub fn sim_mut(&mut self) -> &mut Simulator {
        &mut self.sim
    }

    pub fn apps(&self) -> &AppSuite {
        &self.apps
    }

    pub fn apps_mut(&mut self) -> &mut AppSuite {
        &mut self.apps
    }

    pub fn profiles(&self) -> &QosProfiles {
        &self.profiles
    }

    pub fn set_apps(&mut self, apps: AppSet) {
        self.apps.set_enabled(apps);
    }

    /// One slot under the enabled apps; returns the controls applied.
    pub fn step_slot(&mut self) -> (AppControls, SlotOutcome) {
        let controls = self.apps.controls(&self.sim);
        let out = self.sim.step(&controls);
        self.apps.observe(self.sim.state());
        (controls, out)
    }

    /// Runs slots until the next strategic tick closes.
    pub fn run_tick(&mut self) -> TickReport {
        loop {
            if let (_, SlotOutcome { tick: Some(t), .. }) = self.step_slot() {
                return t;
            }
        }
    }

    /// UEs that missed a QoS requirement during the tick.
    pub fn violations(&self, report: &TickReport) -> usize {
        count_violations(&report.ue_stats, &self.classes, &self.profiles, report.kpi.duration_s)
    }
}
