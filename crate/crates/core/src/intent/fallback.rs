//! Deterministic grammar for intents of the form
//! `<verb> <metric phrase> ... by <n>%`.

use std::sync::LazyLock;

use regex::Regex;

use super::{IntentError, IntentSource, ProcessedIntent};
use crate::sim::KpiKind;

static BY_PCT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\bby\s+(\d+(?:\.\d+)?)\s*%").expect("valid regex"));
static PCT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(\d+(?:\.\d+)?)\s*%").expect("valid regex"));
static WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[a-z]+").expect("valid regex"));

const METRICS: [(&str, KpiKind); 9] = [
    ("energy efficiency", KpiKind::EnergyEfficiency),
    ("energy-efficiency", KpiKind::EnergyEfficiency),
    ("energy_efficiency", KpiKind::EnergyEfficiency),
    ("power efficiency", KpiKind::EnergyEfficiency),
    ("throughput", KpiKind::Throughput),
    ("data rate", KpiKind::Throughput),
    ("bit rate", KpiKind::Throughput),
    ("delay", KpiKind::Delay),
    ("latency", KpiKind::Delay),
];

const UP: [&str; 6] = ["increase", "boost", "raise", "grow", "maximize", "maximise"];
const DOWN: [&str; 7] = ["reduce", "decrease", "lower", "cut", "minimize", "minimise", "shrink"];
const BETTER: [&str; 4] = ["improve", "enhance", "optimize", "optimise"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
    /// Change the metric in its favourable direction.
    Better,
}

impl Direction {
    /// First direction verb in `text`, in any inflection (`increases`, `reduced`).
    pub fn detect(text: &str) -> Option<Self> {
        let lower = text.to_lowercase();
        WORD.find_iter(&lower).find_map(|m| {
            let w = m.as_str();
            let hit = |list: &[&str]| list.iter().any(|v| w.starts_with(v.trim_end_matches('e')));
            if hit(&DOWN) {
                Some(Direction::Down)
            } else if hit(&UP) {
                Some(Direction::Up)
            } else if hit(&BETTER) {
                Some(Direction::Better)
            } else {
                None
            }
        })
    }

    pub fn sign(self, kpi: KpiKind) -> f64 {
        match self {
            Direction::Up => 1.0,
            Direction::Down => -1.0,
            Direction::Better if kpi.higher_is_better() => 1.0,
            Direction::Better => -1.0,
        }
    }
}

/// First metric phrase by position in `text`.
pub fn metric_in(text: &str) -> Option<KpiKind> {
    let lower = text.to_lowercase();
    METRICS
        .iter()
        .filter_map(|(p, k)| lower.find(p).map(|i| (i, *k)))
        .min_by_key(|(i, _)| *i)
        .map(|(_, k)| k)
}

/// Percentage from a strict `by <n>%` phrase.
pub fn magnitude_from_text(text: &str) -> Option<f64> {
    BY_PCT.captures(text)?.get(1)?.as_str().parse().ok()
}

pub(crate) fn percent_in(text: &str) -> Option<f64> {
    PCT.captures(text)?.get(1)?.as_str().parse().ok()
}

pub fn fallback_parse(intent: &str) -> Result<ProcessedIntent, IntentError> {
    let unintelligible = |why: &str| Err(IntentError::Unintelligible(format!("{why} in {intent:?}")));
    let Some(kind) = metric_in(intent) else { return unintelligible("no metric") };
    let Some(pct) = magnitude_from_text(intent) else { return unintelligible("no `by N%` phrase") };
    let Some(dir) = Direction::detect(intent) else { return unintelligible("no direction verb") };
    let magnitude_pct = dir.sign(kind) * pct;
    if magnitude_pct == 0.0 || !magnitude_pct.is_finite() {
        return unintelligible("zero or invalid magnitude");
    }
    let phrase = METRICS.iter().find(|(_, k)| *k == kind).map(|(p, _)| *p).unwrap_or("");
    Ok(ProcessedIntent {
        raw: intent.to_string(),
        kind,
        keywords: vec![phrase.replace('_', " "), format!("{pct}%")],
        magnitude_pct,
        source: IntentSource::Fallback,
        target_class: None,
    })
}
