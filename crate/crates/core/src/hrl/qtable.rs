//! Tabular controller and meta-controller values.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::attention::FilteredActionSet;
use super::goal::NUM_GOALS;
use crate::apps::AppSet;

/// Dominant-class buckets.
pub const NUM_STATES: usize = 4;
const NA: usize = AppSet::NUM_ACTIONS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub s: usize,
    pub g: usize,
    pub a: AppSet,
    pub r_in: f64,
    pub s_next: usize,
    /// The option ended on this step; nothing is bootstrapped.
    pub terminal: bool,
}

/// A transition together with the actions allowed in its next state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experience {
    pub t: Transition,
    pub next_actions: Vec<AppSet>,
}

/// `Q(s, g, a)` over dominant-class bucket, goal index and action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub alpha: f64,
    pub gamma: f64,
    values: Vec<f64>,
}

fn slot(s: usize, g: usize, a: AppSet) -> usize {
    assert!(s < NUM_STATES && g < NUM_GOALS && !a.is_empty(), "Q index out of domain");
    (s * NUM_GOALS + g) * NA + a.index() - 1
}

impl QTable {
    pub fn new(alpha: f64, gamma: f64) -> Self {
        QTable { alpha, gamma, values: vec![0.0; NUM_STATES * NUM_GOALS * NA] }
    }

    pub fn from_values(alpha: f64, gamma: f64, values: Vec<f64>) -> Option<Self> {
        (values.len() == NUM_STATES * NUM_GOALS * NA && values.iter().all(|v| v.is_finite()))
            .then_some(QTable { alpha, gamma, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, s: usize, g: usize, a: AppSet) -> f64 {
        self.values[slot(s, g, a)]
    }

    pub fn set(&mut self, s: usize, g: usize, a: AppSet, v: f64) {
        let i = slot(s, g, a);
        self.values[i] = v;
    }

    /// Highest-valued action among `actions`; ties go to the lowest index.
    pub fn greedy(&self, s: usize, g: usize, actions: &[AppSet]) -> AppSet {
        let mut best: Option<(AppSet, f64)> = None;
        for &a in actions {
            let v = self.get(s, g, a);
            match best {
                Some((b, bv)) if bv > v || (bv == v && b < a) => {}
                _ => best = Some((a, v)),
            }
        }
        best.expect("filtered action set is non-empty").0
    }

    fn max_over(&self, s: usize, g: usize, actions: &[AppSet]) -> f64 {
        actions.iter().map(|&a| self.get(s, g, a)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Epsilon-greedy choice within the filtered set.
    pub fn select_action<R: Rng + ?Sized>(
        &self,
        s: usize,
        g: usize,
        filtered: &FilteredActionSet,
        epsilon2: f64,
        rng: &mut R,
    ) -> AppSet {
        assert!(!filtered.is_empty(), "filtered action set must not be empty");
        if epsilon2 > 0.0 && rng.random::<f64>() < epsilon2 {
            filtered.actions[rng.random_range(0..filtered.len())]
        } else {
            self.greedy(s, g, &filtered.actions)
        }
    }

    /// One-step Q-learning update, maximising over the actions allowed at `s'`.
    pub fn q_update(&mut self, t: &Transition, next_actions: &[AppSet]) {
        let boot = if t.terminal || next_actions.is_empty() {
            0.0
        } else {
            self.gamma * self.max_over(t.s_next, t.g, next_actions)
        };
        let i = slot(t.s, t.g, t.a);
        self.values[i] += self.alpha * (t.r_in + boot - self.values[i]);
    }

    /// Fitted value iteration over a replay buffer: each visited entry is
    /// set to the mean one-step target under the previous sweep's values.
    pub fn fit(&mut self, replay: &[Experience], sweeps: usize) {
        let mut sum = vec![0.0; self.values.len()];
        let mut count = vec![0u32; self.values.len()];
        for _ in 0..sweeps {
            sum.iter_mut().for_each(|v| *v = 0.0);
            count.iter_mut().for_each(|v| *v = 0);
            for e in replay {
                let t = &e.t;
                let boot = if t.terminal || e.next_actions.is_empty() {
                    0.0
                } else {
                    self.gamma * self.max_over(t.s_next, t.g, &e.next_actions)
                };
                let i = slot(t.s, t.g, t.a);
                sum[i] += t.r_in + boot;
                count[i] += 1;
            }
            for i in 0..self.values.len() {
                if count[i] > 0 {
                    self.values[i] = sum[i] / count[i] as f64;
                }
            }
        }
    }
}

/// `Q(s, g)` for the meta-controller, updated with each option's return.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaQ {
    pub alpha: f64,
    values: Vec<f64>,
}

impl MetaQ {
    pub fn new(alpha: f64) -> Self {
        MetaQ { alpha, values: vec![0.0; NUM_STATES * NUM_GOALS] }
    }

    pub fn from_values(alpha: f64, values: Vec<f64>) -> Option<Self> {
        (values.len() == NUM_STATES * NUM_GOALS && values.iter().all(|v| v.is_finite()))
            .then_some(MetaQ { alpha, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, s: usize, g: usize) -> f64 {
        self.values[s * NUM_GOALS + g]
    }

    pub fn update(&mut self, s: usize, g: usize, extrinsic: f64) {
        let v = &mut self.values[s * NUM_GOALS + g];
        *v += self.alpha * (extrinsic - *v);
    }
}

/// Linear annealing from `start` to `end` over `span` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub span: u64,
}

impl EpsilonSchedule {
    pub fn value(&self, step: u64) -> f64 {
        if self.span == 0 || step >= self.span {
            return self.end;
        }
        self.start + (self.end - self.start) * step as f64 / self.span as f64
    }
}
