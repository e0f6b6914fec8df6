use serde::{Deserialize, Serialize};

use super::energy::EnergyParams;
use super::traffic::{InterArrival, TrafficClass, TrafficKind};
use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatKind {
    /// LTE, 800 MHz.
    Lte,
    /// NR mid band, 3.5 GHz.
    NrMid,
    /// NR high band, 30 GHz; the only beamformed layer.
    NrHigh,
}

impl RatKind {
    pub const ALL: [RatKind; 3] = [RatKind::Lte, RatKind::NrMid, RatKind::NrHigh];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn beamformed(self) -> bool {
        matches!(self, RatKind::NrHigh)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatParams {
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub scs_hz: f64,
    pub max_tx_power_dbm: f64,
    pub pathloss_exponent: f64,
    #[serde(default = "default_nf")]
    pub noise_figure_db: f64,
}

fn default_nf() -> f64 {
    7.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatTable {
    pub lte: RatParams,
    pub nr_mid: RatParams,
    pub nr_high: RatParams,
}

impl RatTable {
    pub fn get(&self, rat: RatKind) -> &RatParams {
        match rat {
            RatKind::Lte => &self.lte,
            RatKind::NrMid => &self.nr_mid,
            RatKind::NrHigh => &self.nr_high,
        }
    }
}

impl Default for RatTable {
    fn default() -> Self {
        RatTable {
            lte: RatParams {
                bandwidth_hz: 40e6,
                carrier_hz: 800e6,
                scs_hz: 15e3,
                max_tx_power_dbm: 38.0,
                pathloss_exponent: 2.8,
                noise_figure_db: 7.0,
            },
            nr_mid: RatParams {
                bandwidth_hz: 60e6,
                carrier_hz: 3.5e9,
                scs_hz: 15e3,
                max_tx_power_dbm: 43.0,
                pathloss_exponent: 3.0,
                noise_figure_db: 7.0,
            },
            nr_high: RatParams {
                bandwidth_hz: 60e6,
                carrier_hz: 30e9,
                scs_hz: 15e3,
                max_tx_power_dbm: 43.0,
                pathloss_exponent: 3.5,
                noise_figure_db: 7.0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    pub macro_radius_m: f64,
    pub small_radius_m: f64,
    /// Distance of the small-cell ring from its macro.
    pub small_ring_m: f64,
    /// Share of UEs dropped inside a small-cell hotspot.
    pub hotspot_fraction: f64,
    pub macro_rat: RatKind,
    /// RATs assigned to small cells round-robin.
    pub small_rats: Vec<RatKind>,
    /// Random-waypoint drift speed, applied at strategic ticks.
    pub ue_speed_mps: f64,
    pub shadowing_sigma_db: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            macro_radius_m: 500.0,
            small_radius_m: 100.0,
            small_ring_m: 250.0,
            hotspot_fraction: 2.0 / 3.0,
            macro_rat: RatKind::Lte,
            small_rats: vec![RatKind::NrMid, RatKind::NrHigh],
            ue_speed_mps: 0.0,
            shadowing_sigma_db: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerConfig {
    pub macro_dbm: Vec<f64>,
    pub small_dbm: Vec<f64>,
    /// Index used when no power-allocation control is applied.
    pub default_index: usize,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            macro_dbm: vec![32.0, 35.0, 38.0],
            small_dbm: vec![24.0, 30.0, 36.0],
            default_index: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeamConfig {
    pub num_antennas: usize,
    pub num_beams: usize,
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig { num_antennas: 8, num_beams: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyConfig {
    #[serde(rename = "macro")]
    pub macro_bs: EnergyParams,
    pub small: EnergyParams,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        EnergyConfig { macro_bs: EnergyParams::MACRO, small: EnergyParams::SMALL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub num_macro_bs: usize,
    pub num_small_bs: usize,
    pub num_ues: usize,
    /// Tactical tick, seconds.
    pub slot_duration_s: f64,
    /// Slots per strategic tick.
    pub strategic_every: u64,
    pub rats: RatTable,
    pub layout: LayoutConfig,
    pub power: PowerConfig,
    pub beams: BeamConfig,
    pub energy: EnergyConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 1,
            num_macro_bs: 1,
            num_small_bs: 6,
            num_ues: 60,
            slot_duration_s: 0.01,
            strategic_every: 100,
            rats: RatTable::default(),
            layout: LayoutConfig::default(),
            power: PowerConfig::default(),
            beams: BeamConfig::default(),
            energy: EnergyConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn num_bs(&self) -> usize {
        self.num_macro_bs + self.num_small_bs
    }

    pub fn strategic_tick_s(&self) -> f64 {
        self.slot_duration_s * self.strategic_every as f64
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let err = |m: String| Err(SimError::Config(m));
        if self.num_macro_bs < 1 {
            return err("at least one macro BS is required".into());
        }
        if self.num_ues < 1 {
            return err("at least one UE is required".into());
        }
        if !(self.slot_duration_s > 0.0 && self.slot_duration_s.is_finite()) {
            return err(format!("slot_duration_s must be positive, got {}", self.slot_duration_s));
        }
        if self.strategic_every == 0 {
            return err("strategic_every must be at least 1".into());
        }
        for rat in RatKind::ALL {
            let p = self.rats.get(rat);
            if !(p.bandwidth_hz > 0.0) || !(p.carrier_hz > 0.0) || !(p.scs_hz > 0.0) {
                return err(format!("{rat:?}: bandwidth, carrier and scs must be positive"));
            }
        }
        if self.num_small_bs > 0 && self.layout.small_rats.is_empty() {
            return err("layout.small_rats must list at least one RAT".into());
        }
        if !(0.0..=1.0).contains(&self.layout.hotspot_fraction) {
            return err("layout.hotspot_fraction must lie in [0, 1]".into());
        }
        let check_levels = |name: &str, levels: &[f64], rats: &[RatKind]| -> Result<(), SimError> {
            if levels.is_empty() {
                return Err(SimError::Config(format!("power.{name} must not be empty")));
            }
            if levels.windows(2).any(|w| w[1] < w[0]) {
                return Err(SimError::Config(format!("power.{name} must be sorted ascending")));
            }
            for &rat in rats {
                let max = self.rats.get(rat).max_tx_power_dbm;
                if levels.iter().any(|&l| l > max) {
                    return Err(SimError::Config(format!(
                        "power.{name} exceeds the {rat:?} maximum of {max} dBm"
                    )));
                }
            }
            Ok(())
        };
        check_levels("macro_dbm", &self.power.macro_dbm, &[self.layout.macro_rat])?;
        if self.num_small_bs > 0 {
            check_levels("small_dbm", &self.power.small_dbm, &self.layout.small_rats)?;
        }
        if self.beams.num_antennas == 0 || self.beams.num_beams == 0 {
            return err("beam codebook needs antennas and vectors".into());
        }
        Ok(())
    }
}

/// Per-class overrides and the UE mix of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficConfig {
    /// Relative weight of each class in the UE population.
    pub mix: ClassWeights,
    #[serde(default)]
    pub video: Option<ClassOverride>,
    #[serde(default)]
    pub gaming: Option<ClassOverride>,
    #[serde(default)]
    pub voice: Option<ClassOverride>,
    #[serde(default)]
    pub urllc: Option<ClassOverride>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassWeights {
    pub video: f64,
    pub gaming: f64,
    pub voice: f64,
    pub urllc: f64,
}

impl ClassWeights {
    pub fn get(&self, kind: TrafficKind) -> f64 {
        match kind {
            TrafficKind::Video => self.video,
            TrafficKind::Gaming => self.gaming,
            TrafficKind::Voice => self.voice,
            TrafficKind::Urllc => self.urllc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassOverride {
    pub mean_interarrival_s: Option<f64>,
    pub distribution: Option<InterArrival>,
    pub packet_bits: Option<f64>,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            mix: ClassWeights { video: 1.0, gaming: 1.0, voice: 1.0, urllc: 1.0 },
            video: None,
            gaming: None,
            voice: None,
            urllc: None,
        }
    }
}

impl TrafficConfig {
    pub fn class(&self, kind: TrafficKind) -> TrafficClass {
        let mut c = TrafficClass::default_for(kind);
        let o = match kind {
            TrafficKind::Video => self.video,
            TrafficKind::Gaming => self.gaming,
            TrafficKind::Voice => self.voice,
            TrafficKind::Urllc => self.urllc,
        };
        if let Some(o) = o {
            if let Some(m) = o.mean_interarrival_s {
                c.mean_interarrival_s = m;
            }
            if let Some(d) = o.distribution {
                c.distribution = d;
            }
            if let Some(b) = o.packet_bits {
                c.packet_bits = b;
            }
        }
        c
    }

    pub fn classes(&self) -> [TrafficClass; 4] {
        TrafficKind::ALL.map(|k| self.class(k))
    }

    /// Splits `num_ues` across classes by largest remainder.
    pub fn ue_counts(&self, num_ues: usize) -> Result<[usize; 4], SimError> {
        let w = TrafficKind::ALL.map(|k| self.mix.get(k));
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(SimError::Config("traffic.mix weights must be non-negative".into()));
        }
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            return Err(SimError::Config("traffic.mix must have a positive weight".into()));
        }
        let exact = w.map(|x| x / total * num_ues as f64);
        let mut counts = exact.map(|x| x.floor() as usize);
        let mut left = num_ues - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for i in order {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        Ok(counts)
    }
}
