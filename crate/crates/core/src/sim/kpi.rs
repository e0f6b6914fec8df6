//! KPI snapshots and their accumulation over slots and strategic ticks.

use serde::{Deserialize, Serialize};

use super::traffic::TrafficKind;

/// The three optimisable KPIs. Also serves as the intent type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KpiKind {
    Throughput,
    Delay,
    EnergyEfficiency,
}

impl KpiKind {
    pub const ALL: [KpiKind; 3] = [KpiKind::Throughput, KpiKind::Delay, KpiKind::EnergyEfficiency];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KpiKind::Throughput => "throughput",
            KpiKind::Delay => "delay",
            KpiKind::EnergyEfficiency => "energy_efficiency",
        }
    }

    /// Delay is the only lower-is-better KPI.
    pub fn higher_is_better(self) -> bool {
        !matches!(self, KpiKind::Delay)
    }

    pub fn parse(s: &str) -> Option<Self> {
        KpiKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl std::fmt::Display for KpiKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassKpi {
    pub kind: TrafficKind,
    pub ues: usize,
    /// Aggregate delivered rate of the class.
    pub throughput_bps: f64,
    /// Mean over the class's UEs of their delivered rate.
    pub per_ue_throughput_bps: f64,
    pub mean_delay_s: f64,
    /// Class delivered bits over total network energy.
    pub energy_efficiency: f64,
}

impl ClassKpi {
    /// Value used for QoS comparison; throughput is per UE.
    pub fn qos_value(&self, metric: KpiKind) -> f64 {
        match metric {
            KpiKind::Throughput => self.per_ue_throughput_bps,
            KpiKind::Delay => self.mean_delay_s,
            KpiKind::EnergyEfficiency => self.energy_efficiency,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiSnapshot {
    pub duration_s: f64,
    pub throughput_bps: f64,
    pub mean_delay_s: f64,
    pub energy_efficiency: f64,
    pub total_energy_j: f64,
    pub offered_bps: f64,
    pub per_class: Vec<ClassKpi>,
}

impl KpiSnapshot {
    pub fn value(&self, kpi: KpiKind) -> f64 {
        match kpi {
            KpiKind::Throughput => self.throughput_bps,
            KpiKind::Delay => self.mean_delay_s,
            KpiKind::EnergyEfficiency => self.energy_efficiency,
        }
    }

    pub fn class(&self, kind: TrafficKind) -> Option<&ClassKpi> {
        self.per_class.iter().find(|c| c.kind == kind)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
struct ClassAcc {
    ues: usize,
    delivered_bits: f64,
    delay_sum: f64,
    packets: u64,
}

/// Sums delivered bits, packet delays and energy over any number of slots.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KpiAccumulator {
    duration_s: f64,
    delivered_bits: f64,
    offered_bits: f64,
    delay_sum: f64,
    packets: u64,
    energy_j: f64,
    classes: [ClassAcc; 4],
}

impl KpiAccumulator {
    pub fn new(ues_per_class: [usize; 4]) -> Self {
        let mut acc = KpiAccumulator::default();
        for (c, n) in acc.classes.iter_mut().zip(ues_per_class) {
            c.ues = n;
        }
        acc
    }

    pub fn add_time(&mut self, dt: f64, energy_j: f64) {
        self.duration_s += dt;
        self.energy_j += energy_j;
    }

    pub fn add_offered(&mut self, bits: f64) {
        self.offered_bits += bits;
    }

    pub fn add_delivered(&mut self, class: TrafficKind, bits: f64) {
        self.delivered_bits += bits;
        self.classes[class.index()].delivered_bits += bits;
    }

    pub fn add_packet_delay(&mut self, class: TrafficKind, delay: f64) {
        self.delay_sum += delay;
        self.packets += 1;
        let c = &mut self.classes[class.index()];
        c.delay_sum += delay;
        c.packets += 1;
    }

    pub fn snapshot(&self) -> KpiSnapshot {
        let dur = self.duration_s;
        let rate = |bits: f64| if dur > 0.0 { bits / dur } else { 0.0 };
        let ee = |bits: f64| if self.energy_j > 0.0 { bits / self.energy_j } else { 0.0 };
        let per_class = TrafficKind::ALL
            .iter()
            .map(|&kind| {
                let c = &self.classes[kind.index()];
                ClassKpi {
                    kind,
                    ues: c.ues,
                    throughput_bps: rate(c.delivered_bits),
                    per_ue_throughput_bps: if c.ues > 0 {
                        rate(c.delivered_bits) / c.ues as f64
                    } else {
                        0.0
                    },
                    mean_delay_s: if c.packets > 0 { c.delay_sum / c.packets as f64 } else { 0.0 },
                    energy_efficiency: ee(c.delivered_bits),
                }
            })
            .collect();
        KpiSnapshot {
            duration_s: dur,
            throughput_bps: rate(self.delivered_bits),
            mean_delay_s: if self.packets > 0 { self.delay_sum / self.packets as f64 } else { 0.0 },
            energy_efficiency: ee(self.delivered_bits),
            total_energy_j: self.energy_j,
            offered_bps: rate(self.offered_bits),
            per_class,
        }
    }
}

/// Per-UE counters over one strategic tick; used for QoS violation counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UeTickStats {
    pub offered_bits: f64,
    pub delivered_bits: f64,
    pub delay_sum: f64,
    pub packets: u64,
    pub backlog_bits: f64,
    /// Age of the oldest queued packet at tick end.
    pub oldest_wait_s: f64,
}

impl UeTickStats {
    pub fn throughput_bps(&self, duration: f64) -> f64 {
        if duration > 0.0 { self.delivered_bits / duration } else { 0.0 }
    }

    pub fn mean_delay_s(&self) -> Option<f64> {
        (self.packets > 0).then(|| self.delay_sum / self.packets as f64)
    }
}
