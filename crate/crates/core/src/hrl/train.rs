//! Episodic training and evaluation against a warmed-up network.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{compute_rewards, EpsilonSchedule, Experience, Extrinsic, Goal, HrlAgent, HrlError, StateSummary, Transition};
use crate::apps::{AppId, AppSet};
use crate::network::Network;
use crate::sim::{traffic, KpiKind};

const STREAM_TRAIN: u64 = 0x4A1;
/// Episode seeds for evaluation start here so they never overlap training.
pub const EVAL_SEED_OFFSET: u64 = 1 << 20;

/// A network that has run long enough for queues and App1 to settle, plus
/// the KPI levels goals are scaled from.
#[derive(Debug, Clone)]
pub struct WarmStart {
    pub net: Network,
    /// Per-KPI baseline, indexed by `KpiKind::index`.
    pub baseline: [f64; 3],
}

impl WarmStart {
    /// Runs `pretrain_ticks` with App1 alone so its table is not cold, then
    /// `settle_ticks` with `baseline_apps`; the baseline is the mean over the
    /// settle ticks.
    pub fn new(mut net: Network, baseline_apps: AppSet, pretrain_ticks: u32, settle_ticks: u32) -> Self {
        if pretrain_ticks > 0 {
            net.set_apps(AppSet::from_apps(&[AppId::App1]));
            for _ in 0..pretrain_ticks {
                net.run_tick();
            }
        }
        net.set_apps(baseline_apps);
        let mut sum = [0.0; 3];
        let n = settle_ticks.max(1);
        for _ in 0..n {
            let r = net.run_tick();
            for k in KpiKind::ALL {
                sum[k.index()] += r.kpi.value(k);
            }
        }
        WarmStart { net, baseline: sum.map(|v| v / n as f64) }
    }

    pub fn goal(&self, kpi: KpiKind, magnitude_pct: f64, deadline: u32) -> Result<Goal, HrlError> {
        Goal::new(kpi, magnitude_pct, self.baseline[kpi.index()], deadline)
    }

    pub fn summary(&self) -> StateSummary {
        StateSummary::of(self.net.sim().state())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainSpec {
    pub kpi: KpiKind,
    pub magnitude_pct: f64,
    pub episodes: usize,
    /// Deadline of each training option, in strategic ticks.
    pub episode_ticks: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    pub extrinsic_reward: f64,
    /// Mean size of the searched action set over the episode.
    pub filtered_set_size: f64,
    pub epsilon2: f64,
}

pub fn training_log_csv(log: &[EpisodeLog]) -> String {
    let mut out = String::from("episode,extrinsic_reward,filtered_set_size,epsilon2\n");
    for l in log {
        out.push_str(&format!("{},{},{},{}\n", l.episode, l.extrinsic_reward, l.filtered_set_size, l.epsilon2));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutcome {
    pub extrinsic: Extrinsic,
    pub mean_filtered: f64,
    pub reached: bool,
    pub actions: Vec<AppSet>,
}

/// Who picks the apps during an episode.
#[derive(Debug, Clone, Copy)]
pub enum Policy<'a> {
    Agent { agent: &'a HrlAgent, epsilon2: f64 },
    Fixed(AppSet),
}

fn episode_seed(seed: u64, episode: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ episode
}

/// Runs one option from the warm start with traffic reseeded for `episode`.
/// The option always spans `episode_ticks`; once the goal is reached the
/// chosen apps are held for the rest of it, as at run time. Transitions are
/// appended to `replay` when given.
pub fn run_episode(
    warm: &WarmStart,
    spec: &TrainSpec,
    episode: u64,
    policy: Policy<'_>,
    rng: &mut ChaCha8Rng,
    mut replay: Option<&mut Vec<Experience>>,
) -> Result<EpisodeOutcome, HrlError> {
    let mut net = warm.net.clone();
    net.sim_mut()
        .reseed_traffic(episode_seed(spec.seed, episode))
        .map_err(|e| HrlError::Config(e.to_string()))?;
    let goal = warm.goal(spec.kpi, spec.magnitude_pct, spec.episode_ticks)?;
    let g = goal.index();
    let penalty = match policy {
        Policy::Agent { agent, .. } => agent.cfg.penalty,
        Policy::Fixed(_) => super::HrlConfig::default().penalty,
    };
    let filter = |s: &StateSummary| match policy {
        Policy::Agent { agent, .. } => agent.filtered(s, spec.kpi).set.actions,
        Policy::Fixed(a) => vec![a],
    };

    let mut s = StateSummary::of(net.sim().state());
    let mut allowed = filter(&s);
    let mut extrinsic = Extrinsic::default();
    let mut filtered_sum = 0.0;
    let mut actions = Vec::new();
    let mut held: Option<AppSet> = None;
    for t in 0..spec.episode_ticks {
        let a = match (held, policy) {
            (Some(a), _) => a,
            (None, Policy::Agent { agent, epsilon2 }) => {
                let set = super::FilteredActionSet { scores: vec![1.0; allowed.len()], actions: allowed.clone(), fallback: false };
                agent.q.select_action(s.bucket(), g, &set, epsilon2, rng)
            }
            (None, Policy::Fixed(a)) => a,
        };
        filtered_sum += allowed.len() as f64;
        actions.push(a);
        net.set_apps(a);
        let report = net.run_tick();
        let achieved = report.kpi.value(spec.kpi);
        let r = compute_rewards(&goal, achieved, net.violations(&report), penalty)?;
        extrinsic.push(r.r_in);
        if held.is_none() && goal.reached(achieved) {
            held = Some(a);
        }
        let s_next = StateSummary::of(net.sim().state());
        let next_allowed = held.map_or_else(|| filter(&s_next), |a| vec![a]);
        let terminal = t + 1 == spec.episode_ticks;
        if let Some(buf) = replay.as_deref_mut() {
            buf.push(Experience {
                t: Transition { s: s.bucket(), g, a, r_in: r.r_in, s_next: s_next.bucket(), terminal },
                next_actions: next_allowed.clone(),
            });
        }
        s = s_next;
        allowed = next_allowed;
    }
    let reached = held.is_some();
    let steps = actions.len().max(1) as f64;
    Ok(EpisodeOutcome { extrinsic, mean_filtered: filtered_sum / steps, reached, actions })
}

/// Trains `agent` for `spec.episodes` options, annealing exploration per
/// episode and refitting the controller table from replay after each.
pub fn train(agent: &mut HrlAgent, warm: &WarmStart, spec: &TrainSpec) -> Result<Vec<EpisodeLog>, HrlError> {
    let mut rng = traffic::stream(spec.seed, STREAM_TRAIN);
    let schedule = EpsilonSchedule {
        start: agent.cfg.epsilon_start,
        end: agent.cfg.epsilon_end,
        span: spec.episodes.saturating_sub(1) as u64,
    };
    let s0 = warm.summary().bucket();
    let g = warm.goal(spec.kpi, spec.magnitude_pct, spec.episode_ticks)?.index();
    let mut replay = Vec::new();
    let mut log = Vec::with_capacity(spec.episodes);
    for e in 0..spec.episodes {
        let epsilon2 = schedule.value(e as u64);
        let out = run_episode(warm, spec, e as u64, Policy::Agent { agent, epsilon2 }, &mut rng, Some(&mut replay))?;
        agent.q.fit(&replay, agent.cfg.fit_sweeps);
        agent.meta.update(s0, g, out.extrinsic.sum);
        log.push(EpisodeLog {
            episode: e,
            extrinsic_reward: out.extrinsic.sum,
            filtered_set_size: out.mean_filtered,
            epsilon2,
        });
    }
    Ok(log)
}

/// Mean extrinsic reward over `episodes` evaluation options.
pub fn evaluate(warm: &WarmStart, spec: &TrainSpec, policy: Policy<'_>, episodes: u64) -> Result<f64, HrlError> {
    let mut rng = traffic::stream(spec.seed, STREAM_TRAIN + 1);
    let mut sum = 0.0;
    for e in 0..episodes {
        sum += run_episode(warm, spec, EVAL_SEED_OFFSET + e, policy, &mut rng, None)?.extrinsic.sum;
    }
    Ok(sum / episodes.max(1) as f64)
}

/// Greedy action the trained controller takes in the warm state.
pub fn greedy_action(agent: &HrlAgent, warm: &WarmStart, kpi: KpiKind, magnitude_pct: f64) -> Result<AppSet, HrlError> {
    let s = warm.summary();
    let g = warm.goal(kpi, magnitude_pct, agent.cfg.deadline)?.index();
    Ok(agent.q.greedy(s.bucket(), g, &agent.filtered(&s, kpi).set.actions))
}

/// First episode at which the trailing mean of `window` episodes reaches
/// `threshold`; `None` if it never does.
pub fn episodes_to_threshold(log: &[EpisodeLog], threshold: f64, window: usize) -> Option<usize> {
    let w = window.max(1);
    (w..=log.len()).find_map(|end| {
        let mean = log[end - w..end].iter().map(|l| l.extrinsic_reward).sum::<f64>() / w as f64;
        (mean >= threshold).then_some(end)
    })
}
