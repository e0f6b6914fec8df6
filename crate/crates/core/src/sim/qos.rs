use serde::{Deserialize, Serialize};

use super::kpi::KpiKind;
use super::traffic::TrafficKind;
use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AtLeast,
    AtMost,
}

/// One required level `target` for `metric`, in the metric's own units
/// (bit/s per UE, seconds, bit/J).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QosRequirement {
    pub metric: KpiKind,
    pub target: f64,
    pub direction: Direction,
}

impl QosRequirement {
    pub fn at_least(metric: KpiKind, target: f64) -> Self {
        QosRequirement { metric, target, direction: Direction::AtLeast }
    }

    pub fn at_most(metric: KpiKind, target: f64) -> Self {
        QosRequirement { metric, target, direction: Direction::AtMost }
    }

    /// True when `achieved` fails the requirement.
    pub fn violated_by(&self, achieved: f64) -> bool {
        match self.direction {
            Direction::AtLeast => achieved < self.target,
            Direction::AtMost => achieved > self.target,
        }
    }
}

/// The QoS requirement set of one traffic class.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct QosProfile {
    pub requirements: Vec<QosRequirement>,
}

impl QosProfile {
    pub fn new(requirements: Vec<QosRequirement>) -> Result<Self, SimError> {
        let p = QosProfile { requirements };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (i, r) in self.requirements.iter().enumerate() {
            if !(r.target > 0.0 && r.target.is_finite()) {
                return Err(SimError::Config(format!(
                    "QoS target for {} must be positive, got {}",
                    r.metric, r.target
                )));
            }
            if self.requirements[..i].iter().any(|o| o.metric == r.metric) {
                return Err(SimError::Config(format!(
                    "duplicate QoS requirement for {}",
                    r.metric
                )));
            }
        }
        Ok(())
    }

    pub fn get(&self, metric: KpiKind) -> Option<&QosRequirement> {
        self.requirements.iter().find(|r| r.metric == metric)
    }

    pub fn covers(&self, metric: KpiKind) -> bool {
        self.get(metric).is_some()
    }

    /// Default per-UE requirements, set below each class's mean offered rate.
    pub fn default_for(kind: TrafficKind) -> Self {
        use KpiKind::*;
        let reqs = match kind {
            TrafficKind::Video => vec![
                QosRequirement::at_least(Throughput, 0.5e6),
                QosRequirement::at_most(Delay, 0.100),
            ],
            TrafficKind::Gaming => vec![
                QosRequirement::at_least(Throughput, 0.15e6),
                QosRequirement::at_most(Delay, 0.050),
            ],
            TrafficKind::Voice => vec![
                QosRequirement::at_least(Throughput, 0.1e6),
                QosRequirement::at_most(Delay, 0.100),
            ],
            TrafficKind::Urllc => vec![
                QosRequirement::at_least(Throughput, 2.0e6),
                QosRequirement::at_most(Delay, 0.010),
            ],
        };
        QosProfile { requirements: reqs }
    }
}

/// Per-class profiles indexed by [`TrafficKind::index`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QosProfiles(pub [Option<QosProfile>; 4]);

impl QosProfiles {
    pub fn get(&self, kind: TrafficKind) -> Option<&QosProfile> {
        self.0[kind.index()].as_ref()
    }

    pub fn set(&mut self, kind: TrafficKind, profile: QosProfile) {
        self.0[kind.index()] = Some(profile);
    }

    pub fn empty() -> Self {
        QosProfiles([None, None, None, None])
    }
}

impl Default for QosProfiles {
    fn default() -> Self {
        QosProfiles(TrafficKind::ALL.map(|k| Some(QosProfile::default_for(k))))
    }
}
