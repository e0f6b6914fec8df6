//! Discrete-time multi-RAT cellular simulator.

pub mod channel;
pub mod config;
pub mod controls;
pub mod energy;
pub mod engine;
pub mod kpi;
pub mod qos;
pub mod state;
pub mod traffic;

pub use config::{RatKind, SimConfig, TrafficConfig};
pub use controls::AppControls;
pub use engine::{Radio, SlotOutcome, Simulator, TickReport};
pub use kpi::{KpiKind, KpiSnapshot, UeTickStats};
pub use qos::{Direction, QosProfile, QosProfiles, QosRequirement};
pub use state::{BsKind, NetworkState};
pub use traffic::{TrafficClass, TrafficKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
}
