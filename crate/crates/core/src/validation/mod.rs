//! Intent validation against predicted traffic and QoS drift.

mod forecast;

use serde::{Deserialize, Serialize};

use crate::intent::ProcessedIntent;
use crate::sim::{Direction, KpiKind, KpiSnapshot, QosProfile, QosProfiles, TrafficKind};

pub use forecast::{predict_traffic, ForecastResult, Forecaster, SeasonalNaive};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("insufficient history: have {have} ticks, need {need}")]
    InsufficientHistory { have: usize, need: usize },
    #[error("degenerate measurement: {metric} = {value}")]
    DegenerateMeasurement { metric: KpiKind, value: f64 },
    #[error("configuration error: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    /// High-traffic threshold, bit/s.
    pub th_p: f64,
    /// Low-traffic threshold, bit/s.
    pub th_t: f64,
    pub percentile_high: f64,
    pub percentile_low: f64,
    /// Ticks of history used when recomputing thresholds.
    pub window: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig { th_p: 40e6, th_t: 8e6, percentile_high: 0.8, percentile_low: 0.2, window: 24 }
    }
}

impl ValidationConfig {
    pub fn check(&self) -> Result<(), ValidationError> {
        if !(self.th_t > 0.0 && self.th_t < self.th_p && self.th_p.is_finite()) {
            return Err(ValidationError::Config(format!(
                "thresholds need 0 < th_t < th_p, got th_t={} th_p={}",
                self.th_t, self.th_p
            )));
        }
        let p_ok = |p: f64| p > 0.0 && p <= 1.0;
        if !p_ok(self.percentile_low) || !p_ok(self.percentile_high) || self.percentile_low >= self.percentile_high {
            return Err(ValidationError::Config("percentiles need 0 < low < high <= 1".into()));
        }
        if self.window == 0 {
            return Err(ValidationError::Config("window must be at least one tick".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    HighTraffic,
    LowTraffic,
    ThresholdsRecomputed,
}

impl Branch {
    pub fn of(t_p: f64, cfg: &ValidationConfig) -> Branch {
        if t_p > cfg.th_p {
            Branch::HighTraffic
        } else if t_p < cfg.th_t {
            Branch::LowTraffic
        } else {
            Branch::ThresholdsRecomputed
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftEntry {
    pub class: Option<TrafficKind>,
    pub metric: KpiKind,
    pub direction: Direction,
    pub d_qos: f64,
    pub a_qos: f64,
    /// `D - A` in the metric's own units.
    pub i_q: f64,
    /// `D - A` after mapping to higher-is-better.
    pub i_q_normalized: f64,
    pub drifted: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub entries: Vec<DriftEntry>,
}

impl DriftReport {
    pub fn any_drifted(&self) -> bool {
        self.entries.iter().any(|e| e.drifted)
    }
}

/// Maps a value to higher-is-better: at-most metrics use the reciprocal.
pub fn normalise(direction: Direction, v: f64) -> f64 {
    match direction {
        Direction::AtLeast => v,
        Direction::AtMost => 1.0 / v,
    }
}

/// Drift of each requirement of `profile` given achieved values.
pub fn compute_drift(
    profile: &QosProfile,
    achieved: impl Fn(KpiKind) -> f64,
) -> Result<Vec<DriftEntry>, ValidationError> {
    let mut out = Vec::with_capacity(profile.requirements.len());
    for r in &profile.requirements {
        let a = achieved(r.metric);
        if !(a > 0.0 && a.is_finite()) {
            return Err(ValidationError::DegenerateMeasurement { metric: r.metric, value: a });
        }
        let nd = normalise(r.direction, r.target);
        let na = normalise(r.direction, a);
        let i_q_normalized = nd - na;
        out.push(DriftEntry {
            class: None,
            metric: r.metric,
            direction: r.direction,
            d_qos: r.target,
            a_qos: a,
            i_q: r.target - a,
            i_q_normalized,
            drifted: na <= nd && i_q_normalized != 0.0,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationVerdict {
    pub valid: bool,
    pub branch: Branch,
    pub forecast_bps: f64,
    pub drift_report: DriftReport,
    /// Conflict rule that fired, if any.
    pub conflict: Option<String>,
    /// Thresholds in force after this validation.
    pub thresholds: ValidationConfig,
    pub intent: ProcessedIntent,
}

/// Nearest-rank percentile of `sorted` (ascending, non-empty).
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
    sorted[rank - 1]
}

/// Thresholds from the last `cfg.window` entries of `history`.
pub fn recompute_thresholds(history: &[f64], cfg: &ValidationConfig) -> Result<ValidationConfig, ValidationError> {
    if history.len() < cfg.window || cfg.window == 0 {
        return Err(ValidationError::InsufficientHistory { have: history.len(), need: cfg.window.max(1) });
    }
    let mut w: Vec<f64> = history[history.len() - cfg.window..].to_vec();
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(ValidationError::Config("history holds negative or non-finite volumes".into()));
    }
    if w.iter().all(|&v| v == 0.0) {
        return Err(ValidationError::Config("history is all zero".into()));
    }
    w.sort_by(f64::total_cmp);
    let mut th_p = nearest_rank(&w, cfg.percentile_high);
    let mut th_t = nearest_rank(&w, cfg.percentile_low);
    if th_p <= 0.0 {
        th_p = *w.last().expect("non-empty window");
    }
    if th_t == th_p {
        th_t = 0.99 * th_p;
        th_p *= 1.01;
    }
    if th_t <= 0.0 {
        th_t = 0.01 * th_p;
    }
    Ok(ValidationConfig { th_p, th_t, ..*cfg })
}

/// Classes an intent touches: its target, or every class carrying UEs.
fn affected_classes(intent: &ProcessedIntent, current: &KpiSnapshot) -> Vec<TrafficKind> {
    match intent.target_class {
        Some(k) => vec![k],
        None => current.per_class.iter().filter(|c| c.ues > 0).map(|c| c.kind).collect(),
    }
}

pub fn validate(
    intent: &ProcessedIntent,
    forecast: &ForecastResult,
    cfg: &ValidationConfig,
    current: &KpiSnapshot,
    profiles: &QosProfiles,
    history: &[f64],
) -> Result<ValidationVerdict, ValidationError> {
    cfg.check()?;
    let t_p = forecast.predicted_bps;
    let branch = Branch::of(t_p, cfg);
    let increase = intent.magnitude_pct > 0.0;
    let ee_boost = intent.kind == KpiKind::EnergyEfficiency && increase;

    let mut report = DriftReport::default();
    for class in affected_classes(intent, current) {
        let profile = profiles
            .get(class)
            .ok_or_else(|| ValidationError::Config(format!("no QoS profile for class {class}")))?;
        let impacts = profile.covers(intent.kind);
        let full_check = branch == Branch::HighTraffic && ee_boost;
        if !(impacts || full_check) {
            continue;
        }
        let kpi = current
            .class(class)
            .ok_or_else(|| ValidationError::Config(format!("no measurement for class {class}")))?;
        let entries = compute_drift(profile, |m| kpi.qos_value(m))?;
        report.entries.extend(entries.into_iter().map(|e| DriftEntry { class: Some(class), ..e }));
    }

    let conflict = match branch {
        Branch::LowTraffic if intent.kind == KpiKind::Throughput && increase => {
            Some("throughput increase under low traffic".to_string())
        }
        Branch::HighTraffic if ee_boost && report.any_drifted() => {
            Some("energy-efficiency increase under high traffic with QoS drift".to_string())
        }
        _ => None,
    };
    let thresholds = if branch == Branch::ThresholdsRecomputed { recompute_thresholds(history, cfg)? } else { *cfg };
    Ok(ValidationVerdict {
        valid: !report.any_drifted() && conflict.is_none(),
        branch,
        forecast_bps: t_p,
        drift_report: report,
        conflict,
        thresholds,
        intent: intent.clone(),
    })
}
