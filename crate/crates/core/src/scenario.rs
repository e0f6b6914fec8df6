//! Scenario files: everything needed to start a run, as TOML.

use serde::{Deserialize, Serialize};

use crate::apps::{AppParams, AppSet};
use crate::hrl::HrlConfig;
use crate::sim::{KpiKind, QosProfile, QosProfiles, QosRequirement, SimConfig, TrafficConfig, TrafficKind};
use crate::validation::{SeasonalNaive, ValidationConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("{0}")]
    Syntax(String),
    #[error("missing [{0}] section")]
    MissingSection(&'static str),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

/// Per-class QoS targets; omitted keys mean no requirement on that metric.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QosSpec {
    pub throughput_min_bps: Option<f64>,
    pub delay_max_s: Option<f64>,
    pub energy_efficiency_min: Option<f64>,
}

impl QosSpec {
    fn profile(&self) -> QosProfile {
        let mut reqs = Vec::new();
        if let Some(t) = self.throughput_min_bps {
            reqs.push(QosRequirement::at_least(KpiKind::Throughput, t));
        }
        if let Some(t) = self.delay_max_s {
            reqs.push(QosRequirement::at_most(KpiKind::Delay, t));
        }
        if let Some(t) = self.energy_efficiency_min {
            reqs.push(QosRequirement::at_least(KpiKind::EnergyEfficiency, t));
        }
        QosProfile { requirements: reqs }
    }
}

/// Overrides of the default class profiles.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QosSection {
    pub video: Option<QosSpec>,
    pub gaming: Option<QosSpec>,
    pub voice: Option<QosSpec>,
    pub urllc: Option<QosSpec>,
}

impl QosSection {
    pub fn profiles(&self) -> Result<QosProfiles, ScenarioError> {
        let mut out = QosProfiles::default();
        for (kind, spec) in [
            (TrafficKind::Video, self.video),
            (TrafficKind::Gaming, self.gaming),
            (TrafficKind::Voice, self.voice),
            (TrafficKind::Urllc, self.urllc),
        ] {
            if let Some(spec) = spec {
                let p = spec.profile();
                p.validate().map_err(|e| ScenarioError::Invalid(format!("qos.{kind}: {e}")))?;
                out.set(kind, p);
            }
        }
        Ok(out)
    }
}

/// An intent injected before the given strategic tick runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduledIntent {
    pub at_tick: u64,
    pub text: String,
    #[serde(default)]
    pub target_class: Option<TrafficKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Strategic ticks a headless run lasts unless overridden.
    #[serde(default = "default_ticks")]
    pub ticks: u64,
    /// Apps running before any intent, e.g. `["App2"]`.
    #[serde(default)]
    pub baseline_apps: Vec<String>,
    /// Run intents through validation; off only for ablations.
    #[serde(default = "yes")]
    pub validation_enabled: bool,
    #[serde(default)]
    pub sim: SimConfig,
    pub traffic: TrafficConfig,
    #[serde(default)]
    pub qos: QosSection,
    #[serde(default)]
    pub validation: ValidationConfig,
    #[serde(default)]
    pub forecast: SeasonalNaive,
    #[serde(default)]
    pub hrl: HrlConfig,
    #[serde(default)]
    pub apps: AppParams,
    #[serde(default, rename = "intent")]
    pub intents: Vec<ScheduledIntent>,
}

fn default_ticks() -> u64 {
    60
}

fn yes() -> bool {
    true
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Scenario, ScenarioError> {
        let table: toml::Table = toml::from_str(text).map_err(|e| ScenarioError::Syntax(e.to_string()))?;
        for required in ["name", "traffic"] {
            if !table.contains_key(required) {
                return Err(ScenarioError::MissingSection(required));
            }
        }
        let s: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Syntax(e.to_string()))?;
        s.check()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }

    pub fn check(&self) -> Result<(), ScenarioError> {
        let invalid = |e: String| ScenarioError::Invalid(e);
        self.sim.validate().map_err(|e| invalid(e.to_string()))?;
        for kind in TrafficKind::ALL {
            self.traffic.class(kind).validate().map_err(|e| invalid(e.to_string()))?;
        }
        self.baseline()?;
        self.qos.profiles()?;
        self.validation.check().map_err(|e| invalid(e.to_string()))?;
        self.hrl.check().map_err(|e| invalid(e.to_string()))?;
        if self.forecast.season == 0 {
            return Err(invalid("forecast.season must be at least 1".into()));
        }
        Ok(())
    }

    pub fn baseline(&self) -> Result<AppSet, ScenarioError> {
        AppSet::parse(&self.baseline_apps.join("+"))
            .ok_or_else(|| ScenarioError::Invalid(format!("unknown app in baseline_apps {:?}", self.baseline_apps)))
    }
}

/// Scenarios shipped with the crate, by name.
pub const BUILTIN: [(&str, &str); 4] = [
    ("default", include_str!("../scenarios/default.toml")),
    ("low_traffic", include_str!("../scenarios/low_traffic.toml")),
    ("high_traffic", include_str!("../scenarios/high_traffic.toml")),
    ("dense_video", include_str!("../scenarios/dense_video.toml")),
];

pub fn builtin(name: &str) -> Option<Scenario> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| Scenario::from_toml(text).expect("shipped scenario parses"))
}
