//! The slot stepper.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use tracing::debug;

use super::channel::{self, BeamCodebook};
use super::config::{RatKind, RatParams, SimConfig, TrafficConfig};
use super::controls::AppControls;
use super::energy::{bs_energy, EnergyParams};
use super::kpi::{KpiAccumulator, KpiSnapshot, UeTickStats};
use super::state::{BsKind, BsView, NetworkState, UeView};
use super::traffic::{self, ArrivalProcess, TrafficClass, TrafficKind};
use super::SimError;

const STREAM_PLACEMENT: u64 = 1;
const STREAM_SHADOWING: u64 = 2;
const STREAM_MOBILITY: u64 = 3;
const STREAM_UE_TRAFFIC: u64 = 0x1_0000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Packet {
    arrival: f64,
    remaining_bits: f64,
}

#[derive(Debug, Clone)]
struct Ue {
    class: TrafficKind,
    position: [f64; 2],
    waypoint: [f64; 2],
    serving: Option<usize>,
    beam: Option<usize>,
    queue: VecDeque<Packet>,
    queue_bits: f64,
    arrivals: ArrivalProcess,
    rng: ChaCha8Rng,
    tick: UeTickStats,
}

#[derive(Debug, Clone)]
struct Bs {
    kind: BsKind,
    rat: RatKind,
    position: [f64; 2],
    power_levels: Vec<f64>,
    energy: EnergyParams,
    noise_mw: f64,
    active: bool,
    power_index: usize,
    load_acc: f64,
}

/// Per-tick summary emitted at the end of every strategic tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickReport {
    pub tick: u64,
    /// First slot after the tick.
    pub end_slot: u64,
    pub kpi: KpiSnapshot,
    pub ue_stats: Vec<UeTickStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotOutcome {
    pub kpi: KpiSnapshot,
    pub tick: Option<TickReport>,
    pub rejected_controls: usize,
}

/// Deterministic discrete-time simulator of one macro area with small cells.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimConfig,
    classes: [TrafficClass; 4],
    ue_counts: [usize; 4],
    codebook: BeamCodebook,
    bss: Vec<Bs>,
    ues: Vec<Ue>,
    /// `-pathloss - shadowing`, dB, indexed `[ue][bs]`.
    link_gain_db: Vec<Vec<f64>>,
    shadow_db: Vec<Vec<f64>>,
    mobility_rng: ChaCha8Rng,
    slot: u64,
    tick_acc: KpiAccumulator,
    class_offered: [f64; 4],
    state: NetworkState,
    rejected_total: u64,
}

impl Simulator {
    pub fn new(cfg: SimConfig, traffic_cfg: &TrafficConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let classes = traffic_cfg.classes();
        for c in &classes {
            c.validate()?;
        }
        let ue_counts = traffic_cfg.ue_counts(cfg.num_ues)?;
        let codebook = BeamCodebook::uniform(cfg.beams.num_antennas, cfg.beams.num_beams)?;
        let layout = &cfg.layout;

        let mut bss = Vec::with_capacity(cfg.num_bs());
        let macro_sites: Vec<[f64; 2]> = (0..cfg.num_macro_bs)
            .map(|m| [m as f64 * 2.0 * layout.macro_radius_m, 0.0])
            .collect();
        let rat_noise = |p: &RatParams| {
            channel::dbm_to_mw(channel::thermal_noise_dbm(p.bandwidth_hz, p.noise_figure_db))
        };
        for site in &macro_sites {
            let rat = layout.macro_rat;
            bss.push(Bs {
                kind: BsKind::Macro,
                rat,
                position: *site,
                power_levels: cfg.power.macro_dbm.clone(),
                energy: cfg.energy.macro_bs,
                noise_mw: rat_noise(cfg.rats.get(rat)),
                active: true,
                power_index: 0,
                load_acc: 0.0,
            });
        }
        let per_macro = cfg.num_small_bs.div_ceil(cfg.num_macro_bs.max(1)).max(1);
        for s in 0..cfg.num_small_bs {
            let site = macro_sites[s / per_macro % macro_sites.len()];
            let j = s % per_macro;
            let angle = 2.0 * PI * j as f64 / per_macro as f64;
            let rat = layout.small_rats[s % layout.small_rats.len()];
            bss.push(Bs {
                kind: BsKind::Small,
                rat,
                position: [
                    site[0] + layout.small_ring_m * angle.cos(),
                    site[1] + layout.small_ring_m * angle.sin(),
                ],
                power_levels: cfg.power.small_dbm.clone(),
                energy: cfg.energy.small,
                noise_mw: rat_noise(cfg.rats.get(rat)),
                active: true,
                power_index: 0,
                load_acc: 0.0,
            });
        }
        for b in &mut bss {
            b.power_index = cfg.power.default_index.min(b.power_levels.len() - 1);
        }

        let mut placement = traffic::stream(cfg.seed, STREAM_PLACEMENT);
        let mut ues = Vec::with_capacity(cfg.num_ues);
        let smalls: Vec<usize> = (0..bss.len()).filter(|&b| bss[b].kind == BsKind::Small).collect();
        let mut id = 0usize;
        for kind in TrafficKind::ALL {
            let class = &classes[kind.index()];
            for _ in 0..ue_counts[kind.index()] {
                let position = if !smalls.is_empty() && placement.random::<f64>() < layout.hotspot_fraction {
                    let b = smalls[placement.random_range(0..smalls.len())];
                    point_in_disc(&mut placement, bss[b].position, layout.small_radius_m)
                } else {
                    let site = macro_sites[placement.random_range(0..macro_sites.len())];
                    point_in_disc(&mut placement, site, layout.macro_radius_m)
                };
                let waypoint = position;
                let mut rng = traffic::stream(cfg.seed, STREAM_UE_TRAFFIC + id as u64);
                let arrivals = ArrivalProcess::new(class.gap_sampler()?, 0.0, &mut rng);
                ues.push(Ue {
                    class: kind,
                    position,
                    waypoint,
                    serving: None,
                    beam: None,
                    queue: VecDeque::new(),
                    queue_bits: 0.0,
                    arrivals,
                    rng,
                    tick: UeTickStats::default(),
                });
                id += 1;
            }
        }

        let mut shadow_rng = traffic::stream(cfg.seed, STREAM_SHADOWING);
        let normal = Normal::new(0.0, layout.shadowing_sigma_db.max(0.0))
            .map_err(|e| SimError::Config(format!("shadowing: {e}")))?;
        let shadow_db: Vec<Vec<f64>> = (0..ues.len())
            .map(|_| (0..bss.len()).map(|_| normal.sample(&mut shadow_rng)).collect())
            .collect();

        let expected: Vec<f64> = TrafficKind::ALL
            .iter()
            .map(|k| ue_counts[k.index()] as f64 * classes[k.index()].offered_bps())
            .collect();
        let mix = normalise([expected[0], expected[1], expected[2], expected[3]], ue_counts);

        let mut sim = Simulator {
            tick_acc: KpiAccumulator::new(ue_counts),
            mobility_rng: traffic::stream(cfg.seed, STREAM_MOBILITY),
            cfg,
            classes,
            ue_counts,
            codebook,
            bss,
            ues,
            link_gain_db: Vec::new(),
            shadow_db,
            slot: 0,
            class_offered: [0.0; 4],
            state: NetworkState { slot: 0, ues: Vec::new(), bss: Vec::new(), traffic_mix: mix },
            rejected_total: 0,
        };
        sim.recompute_gains();
        for u in 0..sim.ues.len() {
            sim.ues[u].serving = sim.radio().best_rsrp_bs(u, |_| true);
        }
        sim.state.ues = (0..sim.ues.len())
            .map(|u| UeView {
                id: u,
                class: sim.ues[u].class,
                position: sim.ues[u].position,
                serving: sim.ues[u].serving,
                sinr_db: f64::NEG_INFINITY,
                queue_bits: 0.0,
                queue_packets: 0,
                queue_delay_s: 0.0,
                served_bits: 0.0,
            })
            .collect();
        sim.state.bss = (0..sim.bss.len())
            .map(|b| {
                let bs = &sim.bss[b];
                BsView {
                    id: b,
                    kind: bs.kind,
                    rat: bs.rat,
                    position: bs.position,
                    active: true,
                    load: 0.0,
                    tick_load: 0.0,
                    queue_packets: 0,
                    attached: 0,
                    power_index: bs.power_index,
                    tx_power_dbm: bs.power_levels[bs.power_index],
                    beamforming: false,
                }
            })
            .collect();
        sim.refresh_attached_counts();
        Ok(sim)
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn classes(&self) -> &[TrafficClass; 4] {
        &self.classes
    }

    pub fn ue_counts(&self) -> [usize; 4] {
        self.ue_counts
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn rejected_controls(&self) -> u64 {
        self.rejected_total
    }

    pub fn radio(&self) -> Radio<'_> {
        Radio { sim: self }
    }

    /// Re-seeds every traffic stream; used to give training episodes
    /// distinct but reproducible arrivals from a shared snapshot.
    pub fn reseed_traffic(&mut self, seed: u64) -> Result<(), SimError> {
        let now = self.slot as f64 * self.cfg.slot_duration_s;
        for (id, ue) in self.ues.iter_mut().enumerate() {
            let mut rng = traffic::stream(seed, STREAM_UE_TRAFFIC + id as u64);
            let sampler = self.classes[ue.class.index()].gap_sampler()?;
            ue.arrivals = ArrivalProcess::new(sampler, now, &mut rng);
            ue.rng = rng;
        }
        Ok(())
    }

    fn recompute_gains(&mut self) {
        self.link_gain_db = self
            .ues
            .iter()
            .enumerate()
            .map(|(u, ue)| {
                self.bss
                    .iter()
                    .enumerate()
                    .map(|(b, bs)| {
                        let p = self.cfg.rats.get(bs.rat);
                        let d = distance(ue.position, bs.position);
                        -channel::pathloss_db(p.carrier_hz, p.pathloss_exponent, d) - self.shadow_db[u][b]
                    })
                    .collect()
            })
            .collect();
    }

    fn refresh_attached_counts(&mut self) {
        for b in &mut self.state.bss {
            b.attached = 0;
        }
        for ue in &self.ues {
            if let Some(s) = ue.serving {
                self.state.bss[s].attached += 1;
            }
        }
    }

    fn apply_controls(&mut self, controls: &AppControls) -> usize {
        let mut rejected = 0;
        let nb = self.bss.len();
        let nu = self.ues.len();
        for b in 0..nb {
            self.bss[b].active = true;
        }
        for &b in &controls.sleep {
            if b < nb {
                self.bss[b].active = false;
            } else {
                rejected += 1;
            }
        }
        for b in &mut self.bss {
            b.power_index = self.cfg.power.default_index.min(b.power_levels.len() - 1);
        }
        for p in &controls.power {
            if p.bs < nb && self.bss[p.bs].active && p.index < self.bss[p.bs].power_levels.len() {
                self.bss[p.bs].power_index = p.index;
            } else {
                rejected += 1;
            }
        }
        for s in &controls.steering {
            if s.ue < nu && s.bs < nb && self.bss[s.bs].active {
                self.ues[s.ue].serving = Some(s.bs);
            } else {
                debug!(ue = s.ue, bs = s.bs, "steering control rejected");
                rejected += 1;
            }
        }
        for h in &controls.handovers {
            let ok = h.ue < nu
                && h.target < nb
                && self.ues[h.ue].serving == Some(h.source)
                && self.bss[h.target].active;
            if ok {
                self.ues[h.ue].serving = Some(h.target);
            } else {
                debug!(ue = h.ue, source = h.source, target = h.target, "handover rejected");
                rejected += 1;
            }
        }
        // UEs left on a sleeping BS fall back to the strongest active cell.
        for u in 0..nu {
            let needs = match self.ues[u].serving {
                Some(s) => !self.bss[s].active,
                None => true,
            };
            if needs {
                let best = self.radio().best_rsrp_bs(u, |b| self.bss[b].active);
                self.ues[u].serving = best;
            }
        }
        for ue in &mut self.ues {
            ue.beam = None;
        }
        for bc in &controls.beams {
            let ok = bc.ue < nu
                && bc.bs < nb
                && self.ues[bc.ue].serving == Some(bc.bs)
                && self.bss[bc.bs].rat.beamformed()
                && bc.index < self.codebook.len();
            if ok {
                self.ues[bc.ue].beam = Some(bc.index);
            } else {
                rejected += 1;
            }
        }
        rejected
    }

    /// Advances one slot under `controls`.
    pub fn step(&mut self, controls: &AppControls) -> SlotOutcome {
        let rejected = self.apply_controls(controls);
        self.rejected_total += rejected as u64;
        let dt = self.cfg.slot_duration_s;
        let slot_start = self.slot as f64 * dt;
        let slot_end = slot_start + dt;
        let mut slot_acc = KpiAccumulator::new(self.ue_counts);

        for ue in self.ues.iter_mut() {
            let bits = self.classes[ue.class.index()].packet_bits;
            let Ue { arrivals, rng, queue, queue_bits, tick, .. } = ue;
            let mut offered = 0.0;
            arrivals.drain_until(slot_end, rng, |t| {
                queue.push_back(Packet { arrival: t, remaining_bits: bits });
                offered += bits;
            });
            *queue_bits += offered;
            tick.offered_bits += offered;
            self.class_offered[ue.class.index()] += offered;
            slot_acc.add_offered(offered);
            self.tick_acc.add_offered(offered);
        }

        let nb = self.bss.len();
        let mut backlogged = vec![0usize; nb];
        for ue in &self.ues {
            if let Some(s) = ue.serving {
                if !ue.queue.is_empty() {
                    backlogged[s] += 1;
                }
            }
        }
        let tx_mw: Vec<f64> = self
            .bss
            .iter()
            .map(|b| channel::dbm_to_mw(b.power_levels[b.power_index]))
            .collect();
        let mut busy_share = vec![0.0f64; nb];
        let mut queue_packets = vec![0usize; nb];
        let mut beamforming = vec![false; nb];

        for (u, ue) in self.ues.iter_mut().enumerate() {
            let view = &mut self.state.ues[u];
            view.served_bits = 0.0;
            let Some(s) = ue.serving else {
                view.sinr_db = f64::NEG_INFINITY;
                continue;
            };
            let bs = &self.bss[s];
            let gains = &self.link_gain_db[u];
            let beam_gain = match ue.beam {
                Some(i) => {
                    beamforming[s] = true;
                    let bearing = bearing(bs.position, ue.position);
                    self.codebook.gain_db(i, bearing)
                }
                None => 0.0,
            };
            let signal = tx_mw[s] * channel::db_to_linear(gains[s] + beam_gain);
            let mut interference = 0.0;
            for (b, other) in self.bss.iter().enumerate() {
                if b != s && other.active && other.rat == bs.rat && backlogged[b] > 0 {
                    interference += tx_mw[b] * channel::db_to_linear(gains[b]);
                }
            }
            let sinr = signal / (bs.noise_mw + interference);
            view.sinr_db = channel::linear_to_db(sinr);
            if ue.queue.is_empty() {
                continue;
            }
            let share = self.cfg.rats.get(bs.rat).bandwidth_hz / backlogged[s] as f64;
            let rate = channel::link_rate(sinr, share).unwrap_or(0.0);
            let mut t = slot_start;
            let mut served = 0.0;
            let mut busy = 0.0;
            while rate > 0.0 {
                let Some(p) = ue.queue.front_mut() else { break };
                let start = t.max(p.arrival);
                if start >= slot_end {
                    break;
                }
                let capacity = (slot_end - start) * rate;
                if p.remaining_bits <= capacity {
                    let done = start + p.remaining_bits / rate;
                    served += p.remaining_bits;
                    busy += done - start;
                    t = done;
                    let delay = done - p.arrival;
                    slot_acc.add_packet_delay(ue.class, delay);
                    self.tick_acc.add_packet_delay(ue.class, delay);
                    ue.tick.delay_sum += delay;
                    ue.tick.packets += 1;
                    ue.queue.pop_front();
                } else {
                    p.remaining_bits -= capacity;
                    served += capacity;
                    busy += slot_end - start;
                    break;
                }
            }
            ue.queue_bits = (ue.queue_bits - served).max(0.0);
            if ue.queue.is_empty() {
                ue.queue_bits = 0.0;
            }
            ue.tick.delivered_bits += served;
            view.served_bits = served;
            slot_acc.add_delivered(ue.class, served);
            self.tick_acc.add_delivered(ue.class, served);
            busy_share[s] += busy / (dt * backlogged[s] as f64);
        }

        let mut energy = 0.0;
        for (b, bs) in self.bss.iter_mut().enumerate() {
            let tx = bs.power_levels[bs.power_index];
            energy += bs_energy(&bs.energy, bs.active, tx, dt);
            let load = busy_share[b].clamp(0.0, 1.0);
            bs.load_acc += load;
            let view = &mut self.state.bss[b];
            view.active = bs.active;
            view.load = load;
            view.power_index = bs.power_index;
            view.tx_power_dbm = tx;
            view.beamforming = beamforming[b];
        }
        slot_acc.add_time(dt, energy);
        self.tick_acc.add_time(dt, energy);

        for (u, ue) in self.ues.iter().enumerate() {
            let view = &mut self.state.ues[u];
            view.serving = ue.serving;
            view.position = ue.position;
            view.queue_bits = ue.queue_bits;
            view.queue_packets = ue.queue.len();
            view.queue_delay_s = ue.queue.front().map_or(0.0, |p| (slot_end - p.arrival).max(0.0));
            if let Some(s) = ue.serving {
                queue_packets[s] += ue.queue.len();
            }
        }
        for (b, q) in queue_packets.into_iter().enumerate() {
            self.state.bss[b].queue_packets = q;
        }
        self.refresh_attached_counts();

        self.slot += 1;
        self.state.slot = self.slot;
        let tick = if self.slot % self.cfg.strategic_every == 0 {
            Some(self.finish_tick(slot_end))
        } else {
            None
        };
        SlotOutcome { kpi: slot_acc.snapshot(), tick, rejected_controls: rejected }
    }

    fn finish_tick(&mut self, now: f64) -> TickReport {
        let n = self.cfg.strategic_every as f64;
        for (b, bs) in self.bss.iter_mut().enumerate() {
            self.state.bss[b].tick_load = bs.load_acc / n;
            bs.load_acc = 0.0;
        }
        let ue_stats: Vec<UeTickStats> = self
            .ues
            .iter_mut()
            .map(|ue| {
                let mut s = std::mem::take(&mut ue.tick);
                s.backlog_bits = ue.queue_bits;
                s.oldest_wait_s = ue.queue.front().map_or(0.0, |p| (now - p.arrival).max(0.0));
                s
            })
            .collect();
        let kpi = self.tick_acc.snapshot();
        self.tick_acc = KpiAccumulator::new(self.ue_counts);
        let offered = std::mem::take(&mut self.class_offered);
        self.state.traffic_mix = normalise(offered, self.ue_counts);
        if self.cfg.layout.ue_speed_mps > 0.0 {
            self.drift_ues();
        }
        TickReport {
            tick: self.slot / self.cfg.strategic_every - 1,
            end_slot: self.slot,
            kpi,
            ue_stats,
        }
    }

    fn drift_ues(&mut self) {
        let step = self.cfg.layout.ue_speed_mps * self.cfg.strategic_tick_s();
        let radius = self.cfg.layout.macro_radius_m;
        let centre = self.bss[0].position;
        for ue in &mut self.ues {
            let d = distance(ue.position, ue.waypoint);
            if d <= step {
                ue.position = ue.waypoint;
                ue.waypoint = point_in_disc(&mut self.mobility_rng, centre, radius);
            } else {
                let f = step / d;
                ue.position[0] += (ue.waypoint[0] - ue.position[0]) * f;
                ue.position[1] += (ue.waypoint[1] - ue.position[1]) * f;
            }
        }
        self.recompute_gains();
    }
}

/// Read-only radio model used by the applications for their estimates.
#[derive(Clone, Copy)]
pub struct Radio<'a> {
    sim: &'a Simulator,
}

impl<'a> Radio<'a> {
    pub fn num_bs(&self) -> usize {
        self.sim.bss.len()
    }

    pub fn num_ues(&self) -> usize {
        self.sim.ues.len()
    }

    pub fn bs_kind(&self, bs: usize) -> BsKind {
        self.sim.bss[bs].kind
    }

    pub fn bs_rat(&self, bs: usize) -> RatKind {
        self.sim.bss[bs].rat
    }

    pub fn bandwidth_hz(&self, bs: usize) -> f64 {
        self.sim.cfg.rats.get(self.sim.bss[bs].rat).bandwidth_hz
    }

    pub fn power_levels(&self, bs: usize) -> &'a [f64] {
        &self.sim.bss[bs].power_levels
    }

    pub fn default_power_index(&self, bs: usize) -> usize {
        self.sim.cfg.power.default_index.min(self.sim.bss[bs].power_levels.len() - 1)
    }

    pub fn energy_params(&self, bs: usize) -> &'a EnergyParams {
        &self.sim.bss[bs].energy
    }

    pub fn noise_mw(&self, bs: usize) -> f64 {
        self.sim.bss[bs].noise_mw
    }

    pub fn link_gain_db(&self, ue: usize, bs: usize) -> f64 {
        self.sim.link_gain_db[ue][bs]
    }

    pub fn codebook(&self) -> &'a BeamCodebook {
        &self.sim.codebook
    }

    pub fn slot_duration_s(&self) -> f64 {
        self.sim.cfg.slot_duration_s
    }

    /// Bearing of `ue` seen from `bs`, radians.
    pub fn bearing(&self, bs: usize, ue: usize) -> f64 {
        bearing(self.sim.bss[bs].position, self.sim.ues[ue].position)
    }

    pub fn rsrp_dbm(&self, ue: usize, bs: usize, tx_dbm: f64) -> f64 {
        tx_dbm + self.sim.link_gain_db[ue][bs]
    }

    /// Strongest cell by received power at the default power level.
    pub fn best_rsrp_bs(&self, ue: usize, eligible: impl Fn(usize) -> bool) -> Option<usize> {
        let mut best = None;
        let mut best_p = f64::NEG_INFINITY;
        for b in 0..self.num_bs() {
            if !eligible(b) {
                continue;
            }
            let p = self.rsrp_dbm(ue, b, self.power_levels(b)[self.default_power_index(b)]);
            if p > best_p {
                best_p = p;
                best = Some(b);
            }
        }
        best
    }

    /// Best beam gain available towards `ue` from `bs`; zero for unbeamformed RATs.
    pub fn best_beam_gain_db(&self, bs: usize, ue: usize) -> f64 {
        if !self.bs_rat(bs).beamformed() {
            return 0.0;
        }
        let bearing = self.bearing(bs, ue);
        let cb = self.codebook();
        cb.gain_db(cb.nearest(bearing), bearing)
    }

    /// Full-buffer SINR of `ue` on `bs`, every other active co-channel BS
    /// transmitting at `powers_dbm`.
    pub fn sinr_linear(
        &self,
        ue: usize,
        bs: usize,
        powers_dbm: &[f64],
        active: &[bool],
        beam_gain_db: f64,
    ) -> f64 {
        let rat = self.bs_rat(bs);
        let signal = channel::dbm_to_mw(powers_dbm[bs] + self.link_gain_db(ue, bs) + beam_gain_db);
        let mut interference = 0.0;
        for b in 0..self.num_bs() {
            if b != bs && active[b] && self.bs_rat(b) == rat {
                interference += channel::dbm_to_mw(powers_dbm[b] + self.link_gain_db(ue, b));
            }
        }
        signal / (self.noise_mw(bs) + interference)
    }
}

fn point_in_disc(rng: &mut ChaCha8Rng, centre: [f64; 2], radius: f64) -> [f64; 2] {
    let r = radius * rng.random::<f64>().sqrt();
    let a = 2.0 * PI * rng.random::<f64>();
    [centre[0] + r * a.cos(), centre[1] + r * a.sin()]
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn bearing(from: [f64; 2], to: [f64; 2]) -> f64 {
    (to[1] - from[1]).atan2(to[0] - from[0])
}

/// Normalises `weights` to shares; falls back to UE counts when all zero.
fn normalise(weights: [f64; 4], counts: [usize; 4]) -> [f64; 4] {
    let total: f64 = weights.iter().sum();
    let base = if total > 0.0 { weights } else { counts.map(|c| c as f64) };
    let total: f64 = base.iter().sum();
    if total <= 0.0 {
        return [0.25; 4];
    }
    let mut out = base.map(|w| w / total);
    // absorb rounding so the shares sum to one
    let drift = 1.0 - out.iter().sum::<f64>();
    let i = (0..4).max_by(|&a, &b| out[a].total_cmp(&out[b])).unwrap_or(0);
    out[i] += drift;
    out
}
