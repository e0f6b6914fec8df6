//! The five network applications and their composition.

mod beamforming;
mod handover;
mod power;
mod sleeping;
mod steering;
mod suite;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::sim::KpiKind;

pub use beamforming::{nearest_beam, Beamforming};
pub use handover::HandoverManager;
pub use power::{greedy_power, sum_rate, PowerAllocation};
pub use sleeping::{CellSleeping, SleepParams};
pub use steering::{SteeringParams, TrafficSteering};
pub use suite::{AppCheckpoint, AppParams, AppSuite, APP_CHECKPOINT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AppId {
    App1,
    App2,
    App3,
    App4,
    App5,
}

impl AppId {
    pub const ALL: [AppId; 5] = [AppId::App1, AppId::App2, AppId::App3, AppId::App4, AppId::App5];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            AppId::App1 => "App1",
            AppId::App2 => "App2",
            AppId::App3 => "App3",
            AppId::App4 => "App4",
            AppId::App5 => "App5",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        AppId::ALL.into_iter().find(|a| a.name().eq_ignore_ascii_case(s.trim()))
    }

    pub fn descriptor(self) -> AppDescriptor {
        let (timescale, improves, conflicts_with) = match self {
            AppId::App1 => (Timescale::Tactical, vec![KpiKind::Throughput, KpiKind::Delay], vec![]),
            AppId::App2 => (
                Timescale::Strategic,
                vec![KpiKind::EnergyEfficiency],
                vec![AppId::App3, AppId::App4],
            ),
            AppId::App3 => (Timescale::Tactical, vec![KpiKind::Throughput], vec![AppId::App2]),
            AppId::App4 => (Timescale::Tactical, vec![KpiKind::Throughput], vec![AppId::App2]),
            AppId::App5 => (Timescale::Tactical, vec![KpiKind::EnergyEfficiency], vec![]),
        };
        AppDescriptor { id: self, timescale, improves, conflicts_with }
    }
}

impl fmt::Display for AppId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timescale {
    Tactical,
    Strategic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppDescriptor {
    pub id: AppId,
    pub timescale: Timescale,
    pub improves: Vec<KpiKind>,
    pub conflicts_with: Vec<AppId>,
}

/// Whether `app` can improve `kpi`: 1 if so, else 0.
pub fn capability(app: AppId, kpi: KpiKind) -> u8 {
    let yes = match app {
        AppId::App1 => matches!(kpi, KpiKind::Throughput | KpiKind::Delay),
        AppId::App2 | AppId::App5 => kpi == KpiKind::EnergyEfficiency,
        AppId::App3 | AppId::App4 => kpi == KpiKind::Throughput,
    };
    yes as u8
}

pub fn conflicts(a: AppId, b: AppId) -> bool {
    a.descriptor().conflicts_with.contains(&b)
}

/// A set of applications, stored as a 5-bit mask (bit i = App{i+1}).
///
/// Non-empty sets are the controller's action space; their mask value is the
/// action index 1..=31.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct AppSet(u8);

impl AppSet {
    pub const EMPTY: AppSet = AppSet(0);
    pub const FULL: AppSet = AppSet(0b11111);
    pub const NUM_ACTIONS: usize = 31;

    pub fn from_mask(mask: u8) -> Option<Self> {
        (mask <= 0b11111).then_some(AppSet(mask))
    }

    /// Action with index `1..=31`.
    pub fn from_index(index: usize) -> Option<Self> {
        (1..=31).contains(&index).then_some(AppSet(index as u8))
    }

    pub fn from_apps(apps: &[AppId]) -> Self {
        apps.iter().fold(AppSet::EMPTY, |s, &a| s.with(a))
    }

    pub fn all_actions() -> impl Iterator<Item = AppSet> {
        (1..=31u8).map(AppSet)
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, app: AppId) -> bool {
        self.0 & (1 << app.index()) != 0
    }

    pub fn with(self, app: AppId) -> Self {
        AppSet(self.0 | (1 << app.index()))
    }

    pub fn without(self, app: AppId) -> Self {
        AppSet(self.0 & !(1 << app.index()))
    }

    pub fn is_superset_of(self, other: AppSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn apps(self) -> impl Iterator<Item = AppId> {
        AppId::ALL.into_iter().filter(move |&a| self.contains(a))
    }

    /// Share of member apps able to improve `kpi`.
    pub fn coverage(self, kpi: KpiKind) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.apps().map(|a| capability(a, kpi) as f64).sum::<f64>() / self.len() as f64
    }

    pub fn covers(self, kpi: KpiKind) -> bool {
        self.apps().any(|a| capability(a, kpi) == 1)
    }

    pub fn has_conflict(self) -> bool {
        self.apps().any(|a| self.apps().any(|b| conflicts(a, b)))
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if s.is_empty() || s == "-" {
            return Some(AppSet::EMPTY);
        }
        s.split(['+', ',', ' '])
            .filter(|p| !p.is_empty())
            .try_fold(AppSet::EMPTY, |acc, p| AppId::parse(p).map(|a| acc.with(a)))
    }
}

impl TryFrom<u8> for AppSet {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        AppSet::from_mask(v).ok_or_else(|| format!("app mask {v} out of range"))
    }
}

impl From<AppSet> for u8 {
    fn from(s: AppSet) -> u8 {
        s.0
    }
}

impl fmt::Display for AppSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("-");
        }
        let names: Vec<&str> = self.apps().map(|a| a.name()).collect();
        f.write_str(&names.join("+"))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AppError {
    #[error("{0} is not enabled")]
    Disabled(AppId),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capability_table() {
        assert_eq!(capability(AppId::App2, KpiKind::EnergyEfficiency), 1);
        assert_eq!(capability(AppId::App2, KpiKind::Throughput), 0);
        assert_eq!(capability(AppId::App1, KpiKind::Delay), 1);
        assert_eq!(capability(AppId::App5, KpiKind::Throughput), 0);
        for a in AppId::ALL {
            let d = a.descriptor();
            assert!(!d.improves.is_empty());
            for k in KpiKind::ALL {
                assert_eq!(d.improves.contains(&k), capability(a, k) == 1);
            }
            assert_eq!(d.timescale == Timescale::Strategic, a == AppId::App2);
        }
    }

    #[test]
    fn conflict_table_is_symmetric() {
        for a in AppId::ALL {
            for b in AppId::ALL {
                assert_eq!(conflicts(a, b), conflicts(b, a));
            }
        }
        assert!(AppSet::from_apps(&[AppId::App2, AppId::App4]).has_conflict());
        assert!(!AppSet::from_apps(&[AppId::App1, AppId::App3, AppId::App4]).has_conflict());
    }

    #[test]
    fn action_index_is_bijective() {
        let all: Vec<AppSet> = AppSet::all_actions().collect();
        assert_eq!(all.len(), 31);
        for (i, a) in all.iter().enumerate() {
            assert_eq!(a.index(), i + 1);
            assert_eq!(AppSet::from_index(a.index()), Some(*a));
            assert!(!a.is_empty());
        }
        assert_eq!(AppSet::from_index(0), None);
        assert_eq!(AppSet::from_index(32), None);
    }

    #[test]
    fn display_and_parse_round_trip() {
        for a in AppSet::all_actions() {
            assert_eq!(AppSet::parse(&a.to_string()), Some(a));
        }
        assert_eq!(AppSet::parse("app1, App3"), Some(AppSet::from_apps(&[AppId::App1, AppId::App3])));
        assert_eq!(AppSet::parse("App9"), None);
    }

    #[test]
    fn coverage_fraction() {
        let s = AppSet::from_apps(&[AppId::App1, AppId::App2]);
        assert_eq!(s.coverage(KpiKind::Throughput), 0.5);
        assert!(s.covers(KpiKind::EnergyEfficiency));
    }
}
