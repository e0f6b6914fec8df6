use serde::{Deserialize, Serialize};

use super::{Goal, HrlError};
use crate::sim::{KpiKind, QosProfiles, TrafficKind, UeTickStats};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    /// Normalised progress toward the goal, in [-1, 1].
    pub c_rho: f64,
    /// UEs with at least one violated requirement this tick.
    pub violations: usize,
    pub penalty: f64,
    pub r_in: f64,
}

/// Intrinsic reward `C - penalty * violations` for one tick.
pub fn compute_rewards(goal: &Goal, achieved: f64, violations: usize, penalty: f64) -> Result<RewardBreakdown, HrlError> {
    if !(penalty >= 0.0) {
        return Err(HrlError::Config(format!("penalty must be non-negative, got {penalty}")));
    }
    let span = goal.target_value - goal.baseline;
    if span == 0.0 {
        return Err(HrlError::DegenerateGoal("target equals baseline".into()));
    }
    let c_rho = ((achieved - goal.baseline) / span).clamp(-1.0, 1.0);
    Ok(RewardBreakdown { c_rho, violations, penalty, r_in: c_rho - penalty * violations as f64 })
}

/// Running undiscounted sum of intrinsic rewards over an option.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Extrinsic {
    pub sum: f64,
    pub steps: u32,
}

impl Extrinsic {
    pub fn push(&mut self, r_in: f64) {
        self.sum += r_in;
        self.steps += 1;
    }
}

/// Counts UEs that missed a throughput or delay requirement of their class
/// over a tick of `duration` seconds. A UE still holding a packet older than
/// its delay bound counts as late even if nothing completed.
pub fn count_violations(
    stats: &[UeTickStats],
    classes: &[TrafficKind],
    profiles: &QosProfiles,
    duration: f64,
) -> usize {
    stats
        .iter()
        .zip(classes)
        .filter(|(s, class)| {
            let Some(p) = profiles.get(**class) else { return false };
            let thr = p.get(KpiKind::Throughput).is_some_and(|r| {
                (s.offered_bits > 0.0 || s.backlog_bits > 0.0) && r.violated_by(s.throughput_bps(duration))
            });
            let delay = p.get(KpiKind::Delay).is_some_and(|r| {
                s.mean_delay_s().is_some_and(|d| r.violated_by(d)) || r.violated_by(s.oldest_wait_s)
            });
            thr || delay
        })
        .count()
}
