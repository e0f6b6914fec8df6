//! App2: load- and queue-driven cell sleeping.

use serde::{Deserialize, Serialize};

use crate::sim::{BsKind, NetworkState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SleepParams {
    /// A small cell whose mean load over the last tick is below this, with an
    /// empty queue, is put to sleep.
    pub sleep_load: f64,
    /// Sleeping cells wake when any active cell's tick load exceeds this.
    pub wake_load: f64,
}

impl Default for SleepParams {
    fn default() -> Self {
        SleepParams { sleep_load: 0.1, wake_load: 0.7 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CellSleeping {
    pub params: SleepParams,
}

impl CellSleeping {
    pub fn new(params: SleepParams) -> Self {
        CellSleeping { params }
    }

    /// Sleep set for the coming strategic tick. Macro cells never sleep.
    pub fn act(&self, state: &NetworkState) -> Vec<usize> {
        let wake = state.bss.iter().any(|b| b.active && b.tick_load > self.params.wake_load);
        state
            .bss
            .iter()
            .filter(|b| b.kind == BsKind::Small)
            .filter(|b| {
                if b.active {
                    b.tick_load < self.params.sleep_load && b.queue_packets == 0
                } else {
                    !wake
                }
            })
            .map(|b| b.id)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::state::BsView;
    use crate::sim::RatKind;

    fn bs(id: usize, kind: BsKind, active: bool, load: f64, queue: usize) -> BsView {
        BsView {
            id,
            kind,
            rat: RatKind::NrMid,
            position: [0.0, 0.0],
            active,
            load,
            tick_load: load,
            queue_packets: queue,
            attached: 0,
            power_index: 0,
            tx_power_dbm: 30.0,
            beamforming: false,
        }
    }

    fn state(bss: Vec<BsView>) -> NetworkState {
        NetworkState { slot: 0, ues: vec![], bss, traffic_mix: [0.25; 4] }
    }

    #[test]
    fn idle_cell_sleeps_busy_queue_never() {
        let app = CellSleeping::default();
        let s = state(vec![
            bs(0, BsKind::Macro, true, 0.0, 0),
            bs(1, BsKind::Small, true, 0.0, 0),
            bs(2, BsKind::Small, true, 0.0, 3),
            bs(3, BsKind::Small, true, 0.5, 0),
        ]);
        assert_eq!(app.act(&s), vec![1]);
    }

    #[test]
    fn sleeping_cells_wake_under_pressure() {
        let app = CellSleeping::default();
        let calm = state(vec![bs(0, BsKind::Macro, true, 0.2, 0), bs(1, BsKind::Small, false, 0.0, 0)]);
        assert_eq!(app.act(&calm), vec![1]);
        let busy = state(vec![bs(0, BsKind::Macro, true, 0.9, 0), bs(1, BsKind::Small, false, 0.0, 0)]);
        assert!(app.act(&busy).is_empty());
    }
}
