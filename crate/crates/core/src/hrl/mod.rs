//! Attention-filtered two-level controller choosing app combinations.

mod attention;
mod goal;
mod qtable;
mod reward;
pub mod train;

use serde::{Deserialize, Serialize};

pub use attention::{
    attention_scores, capability_labels, default_theta, features, filter_actions, oracle_label, sample_states,
    train_scorer, AttentionConfig, FilteredActionSet, LabeledSample, Scores, StateSummary, Theta, TrainedScorer,
    FALLBACK_TOP, MIN_TRAINING_SAMPLES, NUM_FEATURES,
};
pub use goal::{goal_index, intent_to_goal, snap_bucket, Goal, GOAL_BUCKETS, GOAL_TOLERANCE, NUM_GOALS};
pub use qtable::{EpsilonSchedule, Experience, MetaQ, QTable, Transition, NUM_STATES};
pub use reward::{compute_rewards, count_violations, Extrinsic, RewardBreakdown};

use crate::sim::KpiKind;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HrlError {
    #[error("baseline {kpi} is {value}; cannot scale a goal from it")]
    DegenerateBaseline { kpi: KpiKind, value: f64 },
    #[error("degenerate goal: {0}")]
    DegenerateGoal(String),
    #[error("attention scorer has no weights")]
    ScorerUnavailable,
    #[error("scorer training: {0}")]
    TrainingDegenerate(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HrlConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Weight per violating UE in the intrinsic reward.
    pub penalty: f64,
    /// Option deadline in strategic ticks.
    pub deadline: u32,
    /// Filter the action space with the attention scorer.
    pub use_attention: bool,
    pub attention: AttentionConfig,
    /// Replay sweeps after each training episode.
    pub fit_sweeps: usize,
    /// Exploration while serving intents in a live run.
    pub runtime_epsilon: f64,
}

impl Default for HrlConfig {
    fn default() -> Self {
        HrlConfig {
            alpha: 0.00025,
            gamma: 0.99,
            epsilon_start: 1.0,
            epsilon_end: 0.1,
            penalty: 0.1,
            deadline: 50,
            use_attention: true,
            attention: AttentionConfig::default(),
            fit_sweeps: 60,
            runtime_epsilon: 0.0,
        }
    }
}

impl HrlConfig {
    pub fn check(&self) -> Result<(), HrlError> {
        let bad = |m: &str| Err(HrlError::Config(m.into()));
        if !(self.alpha >= 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in [0, 1]");
        }
        if !(self.gamma >= 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.epsilon_end) || !(self.epsilon_end..=1.0).contains(&self.epsilon_start) {
            return bad("need 0 <= epsilon_end <= epsilon_start <= 1");
        }
        if !(0.0..=1.0).contains(&self.runtime_epsilon) {
            return bad("runtime_epsilon must lie in [0, 1]");
        }
        if !(self.penalty >= 0.0) {
            return bad("penalty must be non-negative");
        }
        if self.deadline == 0 {
            return bad("deadline must be at least one tick");
        }
        self.attention.check()
    }
}

pub const HRL_CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrlCheckpoint {
    pub version: u32,
    pub alpha: f64,
    pub gamma: f64,
    pub q: Vec<f64>,
    pub meta: Vec<f64>,
    pub theta: Option<Theta>,
}

impl HrlCheckpoint {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serialises")
    }

    pub fn from_json(s: &str) -> Result<Self, HrlError> {
        let c: HrlCheckpoint = serde_json::from_str(s).map_err(|e| HrlError::Checkpoint(e.to_string()))?;
        if c.version != HRL_CHECKPOINT_VERSION {
            return Err(HrlError::Checkpoint(format!("unsupported version {}", c.version)));
        }
        Ok(c)
    }
}

/// The attention filtering actually applied in a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Filtering {
    pub set: FilteredActionSet,
    /// Filtering was requested but no weights were available.
    pub scorer_unavailable: bool,
}

/// Controller table, meta-controller table and scorer weights.
#[derive(Debug, Clone, PartialEq)]
pub struct HrlAgent {
    pub cfg: HrlConfig,
    pub q: QTable,
    pub meta: MetaQ,
    pub theta: Option<Theta>,
}

impl HrlAgent {
    /// Fresh tables; the scorer uses configured weights or the built-in fit.
    pub fn new(cfg: HrlConfig) -> Result<Self, HrlError> {
        cfg.check()?;
        let theta = Some(cfg.attention.theta.unwrap_or_else(default_theta));
        Ok(HrlAgent { q: QTable::new(cfg.alpha, cfg.gamma), meta: MetaQ::new(cfg.alpha), theta, cfg })
    }

    pub fn filtered(&self, s: &StateSummary, kpi: KpiKind) -> Filtering {
        if !self.cfg.use_attention {
            return Filtering { set: FilteredActionSet::all(), scorer_unavailable: false };
        }
        match attention_scores(s, kpi, self.theta.as_ref()) {
            Ok(scores) => Filtering { set: filter_actions(&scores, self.cfg.attention.epsilon), scorer_unavailable: false },
            Err(_) => {
                tracing::warn!("attention scorer unavailable; searching the full action space");
                Filtering { set: FilteredActionSet::all(), scorer_unavailable: true }
            }
        }
    }

    pub fn checkpoint(&self) -> HrlCheckpoint {
        HrlCheckpoint {
            version: HRL_CHECKPOINT_VERSION,
            alpha: self.q.alpha,
            gamma: self.q.gamma,
            q: self.q.values().to_vec(),
            meta: self.meta.values().to_vec(),
            theta: self.theta,
        }
    }

    pub fn restore(&mut self, c: &HrlCheckpoint) -> Result<(), HrlError> {
        let q = QTable::from_values(c.alpha, c.gamma, c.q.clone())
            .ok_or_else(|| HrlError::Checkpoint("controller table has the wrong shape".into()))?;
        let meta = MetaQ::from_values(c.alpha, c.meta.clone())
            .ok_or_else(|| HrlError::Checkpoint("meta table has the wrong shape".into()))?;
        if c.theta.is_some_and(|t| t.iter().any(|v| !v.is_finite())) {
            return Err(HrlError::Checkpoint("scorer weights must be finite".into()));
        }
        self.q = q;
        self.meta = meta;
        self.theta = c.theta;
        Ok(())
    }
}
