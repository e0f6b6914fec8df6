use serde::{Deserialize, Serialize};

use super::HrlError;
use crate::intent::ProcessedIntent;
use crate::sim::{KpiKind, KpiSnapshot};

/// Magnitude buckets (percent) an intent is snapped to.
pub const GOAL_BUCKETS: [f64; 5] = [5.0, 10.0, 15.0, 20.0, 30.0];
pub const NUM_GOALS: usize = 3 * GOAL_BUCKETS.len();
/// Relative tolerance within which a goal counts as reached.
pub const GOAL_TOLERANCE: f64 = 0.02;

/// Index of the bucket nearest `|magnitude_pct|`; ties go to the smaller bucket.
pub fn snap_bucket(magnitude_pct: f64) -> usize {
    let m = magnitude_pct.abs();
    let mut best = 0;
    for (i, b) in GOAL_BUCKETS.iter().enumerate() {
        if (b - m).abs() < (GOAL_BUCKETS[best] - m).abs() {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub kpi: KpiKind,
    pub bucket: usize,
    /// KPI level when the goal was issued.
    pub baseline: f64,
    pub target_value: f64,
    /// Strategic ticks allowed.
    pub deadline: u32,
}

impl Goal {
    pub fn new(kpi: KpiKind, magnitude_pct: f64, baseline: f64, deadline: u32) -> Result<Goal, HrlError> {
        if !(baseline > 0.0 && baseline.is_finite()) {
            return Err(HrlError::DegenerateBaseline { kpi, value: baseline });
        }
        if deadline == 0 {
            return Err(HrlError::Config("goal deadline must be at least one tick".into()));
        }
        let target_value = if kpi.higher_is_better() {
            baseline * (1.0 + magnitude_pct / 100.0)
        } else {
            baseline * (1.0 - magnitude_pct.abs() / 100.0)
        };
        if !(target_value > 0.0) {
            return Err(HrlError::DegenerateGoal(format!("target {target_value} for {kpi}")));
        }
        Ok(Goal { kpi, bucket: snap_bucket(magnitude_pct), baseline, target_value, deadline })
    }

    /// Flat goal index `kpi * buckets + bucket`.
    pub fn index(&self) -> usize {
        goal_index(self.kpi, self.bucket)
    }

    pub fn magnitude_pct(&self) -> f64 {
        GOAL_BUCKETS[self.bucket]
    }

    /// True once `achieved` is at, beyond, or within tolerance of the target.
    pub fn reached(&self, achieved: f64) -> bool {
        let dir = (self.target_value - self.baseline).signum();
        (achieved - self.target_value) * dir >= -GOAL_TOLERANCE * self.target_value.abs()
    }
}

pub fn goal_index(kpi: KpiKind, bucket: usize) -> usize {
    kpi.index() * GOAL_BUCKETS.len() + bucket
}

pub fn intent_to_goal(intent: &ProcessedIntent, current: &KpiSnapshot, deadline: u32) -> Result<Goal, HrlError> {
    Goal::new(intent.kind, intent.magnitude_pct, current.value(intent.kind), deadline)
}
