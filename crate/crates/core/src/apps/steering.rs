//! App1: traffic steering by tabular Q-learning over link features.

use std::collections::VecDeque;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::sim::controls::Steering;
use crate::sim::{RatKind, TrafficKind};

use super::suite::Plan;

const LOAD_BUCKETS: usize = 10;
/// Edges on log2(expected rate / demand).
const RATIO_EDGES: [f64; 7] = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
const RATIO_BUCKETS: usize = RATIO_EDGES.len() + 1;
pub(crate) const TABLE_LEN: usize = 4 * 3 * LOAD_BUCKETS * RATIO_BUCKETS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringParams {
    pub alpha: f64,
    pub gamma: f64,
    pub batch: usize,
    /// Decisions taken with decaying exploration before acting greedily.
    pub exploring_decisions: u64,
    pub replay_capacity: usize,
    /// Minimum Q advantage needed to move a UE.
    pub hysteresis: f64,
}

impl Default for SteeringParams {
    fn default() -> Self {
        SteeringParams {
            alpha: 0.5,
            gamma: 0.9,
            batch: 32,
            exploring_decisions: 3000,
            replay_capacity: 2048,
            hysteresis: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Transition {
    from: usize,
    reward: f64,
    /// Best link feature index seen by the UE at the next decision.
    next: usize,
}

#[derive(Debug, Clone)]
struct Pending {
    feature: usize,
    backlog_start: f64,
}

/// Weight of the newest period in the per-UE demand estimate.
const DEMAND_SMOOTHING: f64 = 0.3;

/// Q-learning traffic steering. Each UE picks the serving BS whose link
/// features (class, RAT, projected utilisation, expected rate over demand)
/// carry the highest value; the reward is the share of the UE's demand
/// served over the period.
#[derive(Debug, Clone)]
pub struct TrafficSteering {
    params: SteeringParams,
    q: Vec<f64>,
    decisions: u64,
    replay: VecDeque<Transition>,
    pending: Vec<Option<Pending>>,
    /// Smoothed arrival rate per UE, bit/s.
    demand: Vec<Option<f64>>,
}

/// Table index for a candidate link. `ratio` is the rate the UE can expect
/// on the BS (its equal share of the Shannon rate) over its demand.
pub(crate) fn feature(class: TrafficKind, rat: RatKind, load: f64, ratio: f64) -> usize {
    let l = ((load.clamp(0.0, 1.0) * LOAD_BUCKETS as f64) as usize).min(LOAD_BUCKETS - 1);
    let r = ratio.max(1e-12).log2();
    let s = RATIO_EDGES.iter().take_while(|&&e| r >= e).count();
    ((class.index() * 3 + rat.index()) * LOAD_BUCKETS + l) * RATIO_BUCKETS + s
}

impl TrafficSteering {
    pub fn new(params: SteeringParams) -> Self {
        TrafficSteering {
            params,
            q: vec![0.0; TABLE_LEN],
            decisions: 0,
            replay: VecDeque::new(),
            pending: Vec::new(),
            demand: Vec::new(),
        }
    }

    pub fn params(&self) -> &SteeringParams {
        &self.params
    }

    pub fn table(&self) -> &[f64] {
        &self.q
    }

    pub fn decisions(&self) -> u64 {
        self.decisions
    }

    pub(crate) fn restore(&mut self, q: Vec<f64>, decisions: u64) {
        self.q = q;
        self.decisions = decisions;
        self.replay.clear();
        self.pending.clear();
        self.demand.clear();
    }

    /// Drops in-flight transitions, e.g. when the app is switched off.
    pub fn reset_pending(&mut self) {
        self.pending.clear();
    }

    pub fn exploration(&self) -> f64 {
        let n = self.params.exploring_decisions;
        if n == 0 || self.decisions >= n {
            0.0
        } else {
            1.0 - self.decisions as f64 / n as f64
        }
    }

    fn update(&mut self, t: Transition) {
        let target = t.reward + self.params.gamma * self.q[t.next];
        self.q[t.from] += self.params.alpha * (target - self.q[t.from]);
    }

    /// One decision round. `served` holds per-UE bits delivered over the last
    /// period of `period_s` seconds.
    pub(crate) fn act(
        &mut self,
        plan: &mut Plan<'_>,
        served: &[f64],
        period_s: f64,
        rng: &mut ChaCha8Rng,
    ) -> Vec<Steering> {
        let n_ue = plan.serving.len();
        if n_ue == 0 {
            return Vec::new();
        }
        self.pending.resize(n_ue, None);
        self.demand.resize(n_ue, None);
        let radio = plan.radio;
        let nb = radio.num_bs();
        let period = period_s.max(1e-9);

        // demand estimates from arrivals over the last period
        let mut reward = vec![None; n_ue];
        for u in 0..n_ue {
            let backlog = plan.state.ues[u].queue_bits;
            let arrived = match &self.pending[u] {
                Some(p) => (served[u] + backlog - p.backlog_start).max(0.0),
                None => served[u] + backlog,
            };
            let rate = arrived / period;
            let d = match self.demand[u] {
                Some(d) => d + DEMAND_SMOOTHING * (rate - d),
                None => rate,
            };
            self.demand[u] = Some(d);
            if self.pending[u].is_some() {
                let want = d * period;
                reward[u] = Some(if want > 0.0 { (served[u] / want).min(1.0) } else { 1.0 });
            }
        }
        let demand: Vec<f64> = self.demand.iter().map(|d| d.unwrap_or(0.0).max(1e3)).collect();

        // spectral efficiency of every candidate link, and projected
        // utilisation and head count per BS, kept current as UEs move
        let se: Vec<Vec<f64>> = (0..n_ue)
            .map(|u| {
                (0..nb)
                    .map(|b| if plan.active[b] { (1.0 + plan.sinr_estimate(u, b)).log2().max(1e-3) } else { 0.0 })
                    .collect()
            })
            .collect();
        let mut util = vec![0.0; nb];
        let mut count = vec![0usize; nb];
        for (u, s) in plan.serving.iter().enumerate() {
            if let Some(b) = *s {
                util[b] += demand[u] / (radio.bandwidth_hz(b) * se[u][b]);
                count[b] += 1;
            }
        }

        let mut out = Vec::new();
        for u in 0..n_ue {
            let class = plan.state.ues[u].class;
            let mut best: Option<(usize, f64, usize)> = None;
            let mut cur: Option<(usize, f64, usize)> = None;
            let mut candidates = Vec::with_capacity(nb);
            for b in 0..nb {
                if !plan.active[b] {
                    continue;
                }
                let here = plan.serving[u] == Some(b);
                let cost = demand[u] / (radio.bandwidth_hz(b) * se[u][b]);
                let load = if here { util[b] } else { util[b] + cost };
                let sharers = count[b] + usize::from(!here);
                let rate = radio.bandwidth_hz(b) * se[u][b] / sharers as f64;
                let f = feature(class, radio.bs_rat(b), load, rate / demand[u]);
                let v = self.q[f];
                candidates.push((b, v, f));
                if best.is_none_or(|(_, bv, _)| v > bv) {
                    best = Some((b, v, f));
                }
                if here {
                    cur = Some((b, v, f));
                }
            }
            let Some(greedy) = best else { continue };

            if let (Some(p), Some(r)) = (self.pending[u].take(), reward[u]) {
                let t = Transition { from: p.feature, reward: r, next: greedy.2 };
                self.update(t);
                if self.replay.len() == self.params.replay_capacity {
                    self.replay.pop_front();
                }
                self.replay.push_back(t);
            }

            let explore = rng.random::<f64>() < self.exploration();
            let chosen = if explore {
                *candidates.choose(rng).expect("non-empty candidate list")
            } else {
                match cur {
                    Some(c) if greedy.1 <= c.1 + self.params.hysteresis => c,
                    _ => greedy,
                }
            };
            self.decisions += 1;
            if plan.serving[u] != Some(chosen.0) {
                let b = chosen.0;
                util[b] += demand[u] / (radio.bandwidth_hz(b) * se[u][b]);
                count[b] += 1;
                if let Some(s) = plan.serving[u] {
                    util[s] = (util[s] - demand[u] / (radio.bandwidth_hz(s) * se[u][s])).max(0.0);
                    count[s] -= 1;
                }
                plan.serving[u] = Some(b);
                out.push(Steering { ue: u, bs: b });
            }
            self.pending[u] = Some(Pending { feature: chosen.2, backlog_start: plan.state.ues[u].queue_bits });
        }

        if self.replay.len() >= self.params.batch {
            for _ in 0..self.params.batch {
                let i = rng.random_range(0..self.replay.len());
                let t = self.replay[i];
                self.update(t);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_index_in_range_and_distinct() {
        let mut seen = std::collections::HashSet::new();
        for c in TrafficKind::ALL {
            for r in RatKind::ALL {
                for l in 0..LOAD_BUCKETS {
                    for s in 0..RATIO_BUCKETS {
                        let load = (l as f64 + 0.5) / LOAD_BUCKETS as f64;
                        let ratio = if s == 0 { 0.01 } else { (RATIO_EDGES[s - 1] + 0.1).exp2() };
                        let f = feature(c, r, load, ratio);
                        assert!(f < TABLE_LEN);
                        assert!(seen.insert(f));
                    }
                }
            }
        }
        assert_eq!(seen.len(), TABLE_LEN);
    }

    #[test]
    fn exploration_decays_to_zero() {
        let mut s = TrafficSteering::new(SteeringParams::default());
        assert_eq!(s.exploration(), 1.0);
        s.decisions = 1500;
        assert!((s.exploration() - 0.5).abs() < 1e-12);
        s.decisions = 3000;
        assert_eq!(s.exploration(), 0.0);
    }

    #[test]
    fn update_moves_toward_target() {
        let mut s = TrafficSteering::new(SteeringParams::default());
        s.update(Transition { from: 3, reward: 1.0, next: 3 });
        assert_eq!(s.q[3], 0.5);
    }
}
