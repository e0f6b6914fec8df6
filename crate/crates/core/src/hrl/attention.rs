//! Attention scoring and filtering of the 31 app combinations.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HrlError;
use crate::apps::{AppId, AppSet};
use crate::sim::{traffic, KpiKind, NetworkState, TrafficKind};

pub const NUM_FEATURES: usize = 6;
pub type Theta = [f64; NUM_FEATURES];
pub const FALLBACK_TOP: usize = 3;

/// The part of the network state the scorer looks at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub mix: [f64; 4],
    pub mean_load: f64,
}

impl StateSummary {
    pub fn of(state: &NetworkState) -> Self {
        StateSummary { mix: state.traffic_mix, mean_load: state.mean_load() }
    }

    /// Dominant-class bucket used as the tabular state.
    pub fn bucket(&self) -> usize {
        let mut best = 0;
        for k in 1..4 {
            if self.mix[k] > self.mix[best] {
                best = k;
            }
        }
        best
    }
}

/// The KPI a class mostly cares about.
fn class_need(kind: TrafficKind) -> KpiKind {
    match kind {
        TrafficKind::Video => KpiKind::Throughput,
        TrafficKind::Gaming | TrafficKind::Urllc => KpiKind::Delay,
        TrafficKind::Voice => KpiKind::EnergyEfficiency,
    }
}

/// Features: bias, capability coverage, conflict flag, traffic-mix match,
/// load while sleeping is on, set size / 5.
pub fn features(s: &StateSummary, kpi: KpiKind, a: AppSet) -> Theta {
    let mix_match: f64 = TrafficKind::ALL
        .iter()
        .map(|&k| if a.covers(class_need(k)) { s.mix[k.index()] } else { 0.0 })
        .sum();
    let sleeping = if a.contains(AppId::App2) { s.mean_load.clamp(0.0, 1.0) } else { 0.0 };
    [
        1.0,
        a.coverage(kpi),
        a.has_conflict() as u8 as f64,
        mix_match,
        sleeping,
        a.len() as f64 / 5.0,
    ]
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn dot(a: &Theta, b: &Theta) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttentionConfig {
    pub epsilon: f64,
    /// Loaded weights; `None` means the scorer is unavailable.
    pub theta: Option<Theta>,
}

impl Default for AttentionConfig {
    fn default() -> Self {
        AttentionConfig { epsilon: 0.3, theta: None }
    }
}

impl AttentionConfig {
    pub fn check(&self) -> Result<(), HrlError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(HrlError::Config(format!("attention epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.theta.is_some_and(|t| t.iter().any(|v| !v.is_finite())) {
            return Err(HrlError::Config("attention weights must be finite".into()));
        }
        Ok(())
    }
}

/// Scores for actions 1..=31, stored at `index - 1`.
pub type Scores = [f64; AppSet::NUM_ACTIONS];

pub fn attention_scores(s: &StateSummary, kpi: KpiKind, theta: Option<&Theta>) -> Result<Scores, HrlError> {
    let theta = theta.ok_or(HrlError::ScorerUnavailable)?;
    let mut out = [0.0; AppSet::NUM_ACTIONS];
    for a in AppSet::all_actions() {
        out[a.index() - 1] = logistic(dot(theta, &features(s, kpi, a)));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredActionSet {
    pub actions: Vec<AppSet>,
    pub scores: Vec<f64>,
    /// Nothing cleared the threshold and the top scorers were kept instead.
    pub fallback: bool,
}

impl FilteredActionSet {
    /// The unfiltered action space, e.g. when no scorer is loaded.
    pub fn all() -> Self {
        FilteredActionSet { actions: AppSet::all_actions().collect(), scores: vec![1.0; AppSet::NUM_ACTIONS], fallback: false }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn contains(&self, a: AppSet) -> bool {
        self.actions.contains(&a)
    }
}

/// Keeps actions scoring above `epsilon`, or the top three if none does.
pub fn filter_actions(scores: &Scores, epsilon: f64) -> FilteredActionSet {
    let mut actions = Vec::new();
    let mut kept = Vec::new();
    for a in AppSet::all_actions() {
        let s = scores[a.index() - 1];
        if s > epsilon || epsilon <= 0.0 {
            actions.push(a);
            kept.push(s);
        }
    }
    if !actions.is_empty() {
        return FilteredActionSet { actions, scores: kept, fallback: false };
    }
    let mut order: Vec<AppSet> = AppSet::all_actions().collect();
    order.sort_by(|a, b| scores[b.index() - 1].total_cmp(&scores[a.index() - 1]).then(a.cmp(b)));
    order.truncate(FALLBACK_TOP);
    order.sort();
    let kept = order.iter().map(|a| scores[a.index() - 1]).collect();
    FilteredActionSet { actions: order, scores: kept, fallback: true }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub state: StateSummary,
    pub kpi: KpiKind,
    pub action: AppSet,
    pub fulfilled: bool,
}

impl LabeledSample {
    pub fn features(&self) -> Theta {
        features(&self.state, self.kpi, self.action)
    }
}

/// Label from the capability and conflict tables alone.
pub fn oracle_label(kpi: KpiKind, a: AppSet) -> bool {
    a.coverage(kpi) == 1.0 && !a.has_conflict()
}

/// Random but reproducible state summaries.
pub fn sample_states(n: usize, seed: u64) -> Vec<StateSummary> {
    let mut rng: ChaCha8Rng = traffic::stream(seed, 0x5CA1);
    (0..n)
        .map(|_| {
            let mut mix = [0.0; 4];
            for m in &mut mix {
                *m = rng.random::<f64>();
            }
            let sum: f64 = mix.iter().sum();
            mix.iter_mut().for_each(|m| *m /= sum);
            StateSummary { mix, mean_load: rng.random::<f64>() }
        })
        .collect()
}

/// Every (state, intent type, action) triple labelled by the oracle.
pub fn capability_labels(states: &[StateSummary]) -> Vec<LabeledSample> {
    let mut out = Vec::with_capacity(states.len() * 93);
    for s in states {
        for kpi in KpiKind::ALL {
            for action in AppSet::all_actions() {
                out.push(LabeledSample { state: *s, kpi, action, fulfilled: oracle_label(kpi, action) });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainedScorer {
    pub theta: Theta,
    pub train_accuracy: f64,
    pub holdout_accuracy: f64,
    pub train_samples: usize,
    pub holdout_samples: usize,
}

pub const MIN_TRAINING_SAMPLES: usize = 500;
const EPOCHS: usize = 3000;
const LEARNING_RATE: f64 = 0.5;
const L2: f64 = 1e-4;
/// Every n-th sample is held out.
const HOLDOUT_EVERY: usize = 5;

fn accuracy(theta: &Theta, data: &[(Theta, f64)]) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let hits = data.iter().filter(|(x, y)| (logistic(dot(theta, x)) > 0.5) == (*y > 0.5)).count();
    hits as f64 / data.len() as f64
}

/// Logistic regression by full-batch gradient descent on cross-entropy.
pub fn train_scorer(samples: &[LabeledSample]) -> Result<TrainedScorer, HrlError> {
    if samples.len() < MIN_TRAINING_SAMPLES {
        return Err(HrlError::TrainingDegenerate(format!(
            "{} samples, need at least {MIN_TRAINING_SAMPLES}",
            samples.len()
        )));
    }
    let positives = samples.iter().filter(|s| s.fulfilled).count();
    if positives == 0 || positives == samples.len() {
        return Err(HrlError::TrainingDegenerate("labels contain a single class".into()));
    }
    let mut train = Vec::new();
    let mut hold = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        let row = (s.features(), s.fulfilled as u8 as f64);
        if i % HOLDOUT_EVERY == HOLDOUT_EVERY - 1 { hold.push(row) } else { train.push(row) }
    }
    let mut theta = [0.0; NUM_FEATURES];
    let n = train.len() as f64;
    for _ in 0..EPOCHS {
        let mut grad = [0.0; NUM_FEATURES];
        for (x, y) in &train {
            let err = logistic(dot(&theta, x)) - y;
            for (g, xi) in grad.iter_mut().zip(x) {
                *g += err * xi;
            }
        }
        for (t, g) in theta.iter_mut().zip(grad) {
            *t -= LEARNING_RATE * (g / n + L2 * *t);
        }
    }
    Ok(TrainedScorer {
        theta,
        train_accuracy: accuracy(&theta, &train),
        holdout_accuracy: accuracy(&theta, &hold),
        train_samples: train.len(),
        holdout_samples: hold.len(),
    })
}

/// Weights fitted to oracle labels over a fixed set of sampled states.
pub fn default_theta() -> Theta {
    static THETA: std::sync::OnceLock<Theta> = std::sync::OnceLock::new();
    *THETA.get_or_init(|| {
        train_scorer(&capability_labels(&sample_states(10, 7)))
            .expect("oracle labels are two-class and large enough")
            .theta
    })
}
