//! Linear base-station power model.

use serde::{Deserialize, Serialize};

use super::channel::dbm_to_watts;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Static consumption of an active BS, W.
    pub p0_w: f64,
    /// Slope applied to radiated power.
    pub delta: f64,
    pub p_sleep_w: f64,
}

impl EnergyParams {
    pub const MACRO: EnergyParams = EnergyParams { p0_w: 130.0, delta: 4.7, p_sleep_w: 10.0 };
    pub const SMALL: EnergyParams = EnergyParams { p0_w: 6.8, delta: 4.0, p_sleep_w: 1.0 };

    /// Consumed power in watts.
    pub fn power_w(&self, active: bool, tx_power_dbm: f64) -> f64 {
        if active {
            self.p0_w + self.delta * dbm_to_watts(tx_power_dbm)
        } else {
            self.p_sleep_w
        }
    }
}

/// Energy in joules one BS consumes over `slot_duration` seconds.
pub fn bs_energy(params: &EnergyParams, active: bool, tx_power_dbm: f64, slot_duration: f64) -> f64 {
    params.power_w(active, tx_power_dbm) * slot_duration
}
