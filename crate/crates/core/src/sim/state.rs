use serde::{Deserialize, Serialize};

use super::config::RatKind;
use super::traffic::TrafficKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BsKind {
    Macro,
    Small,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeView {
    pub id: usize,
    pub class: TrafficKind,
    pub position: [f64; 2],
    pub serving: Option<usize>,
    pub sinr_db: f64,
    pub queue_bits: f64,
    pub queue_packets: usize,
    /// Age of the head-of-line packet, 0 when the queue is empty.
    pub queue_delay_s: f64,
    /// Bits delivered in the last slot.
    pub served_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BsView {
    pub id: usize,
    pub kind: BsKind,
    pub rat: RatKind,
    pub position: [f64; 2],
    pub active: bool,
    /// Share of the slot's time-frequency resources used, last slot.
    pub load: f64,
    /// Mean load over the last completed strategic tick.
    pub tick_load: f64,
    pub queue_packets: usize,
    pub attached: usize,
    pub power_index: usize,
    pub tx_power_dbm: f64,
    /// Whether UE-specific beams were applied last slot.
    pub beamforming: bool,
}

/// Observable per-slot snapshot of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub slot: u64,
    pub ues: Vec<UeView>,
    pub bss: Vec<BsView>,
    /// Share of offered traffic per class over the last strategic tick.
    pub traffic_mix: [f64; 4],
}

impl NetworkState {
    /// Index of the class carrying the largest share of traffic.
    pub fn dominant_class(&self) -> TrafficKind {
        let mut best = 0;
        for i in 1..4 {
            if self.traffic_mix[i] > self.traffic_mix[best] {
                best = i;
            }
        }
        TrafficKind::ALL[best]
    }

    pub fn mean_load(&self) -> f64 {
        let active: Vec<f64> = self.bss.iter().filter(|b| b.active).map(|b| b.tick_load).collect();
        if active.is_empty() {
            0.0
        } else {
            active.iter().sum::<f64>() / active.len() as f64
        }
    }

    /// Checks the snapshot invariants; returns the first violation found.
    pub fn check_invariants(&self) -> Result<(), String> {
        for b in &self.bss {
            if !(0.0..=1.0 + 1e-9).contains(&b.load) {
                return Err(format!("bs {} load {} outside [0,1]", b.id, b.load));
            }
        }
        for u in &self.ues {
            if let Some(s) = u.serving {
                if !self.bss[s].active {
                    return Err(format!("ue {} attached to sleeping bs {}", u.id, s));
                }
            }
        }
        let sum: f64 = self.traffic_mix.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(format!("traffic mix sums to {sum}"));
        }
        Ok(())
    }
}
