//! Brute-force reference for the validation decision, written from the rule
//! table rather than from the library code.

#![allow(dead_code)]

use intent_ran::intent::{IntentSource, ProcessedIntent};
use intent_ran::sim::kpi::ClassKpi;
use intent_ran::sim::{KpiKind, KpiSnapshot, QosProfile, QosProfiles, QosRequirement, TrafficKind};
use intent_ran::validation::{validate, Branch, ForecastResult, ValidationConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct Case {
    pub kind: KpiKind,
    pub magnitude_pct: f64,
    pub target_class: Option<TrafficKind>,
    pub t_p: f64,
    pub cfg: ValidationConfig,
    pub snapshot: KpiSnapshot,
    pub profiles: QosProfiles,
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expected {
    pub branch: Branch,
    pub drifted: bool,
    pub conflict: bool,
    pub valid: bool,
    pub thresholds: (f64, f64),
}

fn violates(req: &QosRequirement, a: f64) -> bool {
    match req.direction {
        intent_ran::sim::Direction::AtLeast => a < req.target,
        intent_ran::sim::Direction::AtMost => a > req.target,
    }
}

fn rank(sorted: &[f64], p: f64) -> f64 {
    // smallest value with at least p of the sample at or below it
    let n = sorted.len();
    for (i, v) in sorted.iter().enumerate() {
        if (i + 1) as f64 >= p * n as f64 - 1e-12 {
            return *v;
        }
    }
    sorted[n - 1]
}

pub fn expected(c: &Case) -> Expected {
    let branch = if c.t_p > c.cfg.th_p {
        Branch::HighTraffic
    } else if c.t_p < c.cfg.th_t {
        Branch::LowTraffic
    } else {
        Branch::ThresholdsRecomputed
    };
    let up = c.magnitude_pct > 0.0;
    let ee_up = c.kind == KpiKind::EnergyEfficiency && up;
    let classes: Vec<TrafficKind> = match c.target_class {
        Some(k) => vec![k],
        None => c.snapshot.per_class.iter().filter(|k| k.ues > 0).map(|k| k.kind).collect(),
    };
    let mut drifted = false;
    for k in classes {
        let p = c.profiles.get(k).unwrap();
        let touched = p.requirements.iter().any(|r| r.metric == c.kind);
        if !touched && !(branch == Branch::HighTraffic && ee_up) {
            continue;
        }
        let m = c.snapshot.per_class.iter().find(|x| x.kind == k).unwrap();
        for r in &p.requirements {
            let a = match r.metric {
                KpiKind::Throughput => m.per_ue_throughput_bps,
                KpiKind::Delay => m.mean_delay_s,
                KpiKind::EnergyEfficiency => m.energy_efficiency,
            };
            drifted |= violates(r, a);
        }
    }
    let conflict = match branch {
        Branch::LowTraffic => c.kind == KpiKind::Throughput && up,
        Branch::HighTraffic => ee_up && drifted,
        Branch::ThresholdsRecomputed => false,
    };
    let thresholds = if branch == Branch::ThresholdsRecomputed {
        let mut w = c.history[c.history.len() - c.cfg.window..].to_vec();
        w.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (rank(&w, c.cfg.percentile_low), rank(&w, c.cfg.percentile_high))
    } else {
        (c.cfg.th_t, c.cfg.th_p)
    };
    Expected { branch, drifted, conflict, valid: !drifted && !conflict, thresholds }
}

/// Runs the library on `c` and compares against the reference.
pub fn check(c: &Case) -> Result<(), String> {
    let intent = ProcessedIntent {
        raw: String::new(),
        kind: c.kind,
        keywords: vec!["k".into()],
        magnitude_pct: c.magnitude_pct,
        source: IntentSource::Fallback,
        target_class: c.target_class,
    };
    let fc = ForecastResult { predicted_bps: c.t_p, model_id: "oracle".into(), history_window: 1 };
    let v = validate(&intent, &fc, &c.cfg, &c.snapshot, &c.profiles, &c.history).map_err(|e| e.to_string())?;
    let want = expected(c);
    let got = Expected {
        branch: v.branch,
        drifted: v.drift_report.any_drifted(),
        conflict: v.conflict.is_some(),
        valid: v.valid,
        thresholds: (v.thresholds.th_t, v.thresholds.th_p),
    };
    if got == want {
        Ok(())
    } else {
        Err(format!("case {c:?}\n got {got:?}\nwant {want:?}"))
    }
}

fn custom_profiles() -> QosProfiles {
    use KpiKind::*;
    let mut p = QosProfiles::empty();
    p.set(
        TrafficKind::Video,
        QosProfile::new(vec![QosRequirement::at_least(Throughput, 0.5e6), QosRequirement::at_most(Delay, 0.1)]).unwrap(),
    );
    p.set(TrafficKind::Gaming, QosProfile::new(vec![QosRequirement::at_most(Delay, 0.05)]).unwrap());
    p.set(
        TrafficKind::Voice,
        QosProfile::new(vec![QosRequirement::at_least(Throughput, 0.1e6), QosRequirement::at_least(EnergyEfficiency, 1e5)])
            .unwrap(),
    );
    p.set(TrafficKind::Urllc, QosProfile::new(vec![QosRequirement::at_most(Delay, 0.01)]).unwrap());
    p
}

/// Achieved value for `req` scaled from its target by `level`: below, at or
/// above the target for level 0, 1, 2.
fn achieved(p: &QosProfile, metric: KpiKind, level: usize, default: f64) -> f64 {
    let f = [0.5, 1.0, 2.0][level];
    p.get(metric).map(|r| r.target * f).unwrap_or(default)
}

fn snapshot(profiles: &QosProfiles, levels: &[(usize, usize, usize); 4], ues: [usize; 4]) -> KpiSnapshot {
    let per_class = TrafficKind::ALL
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let p = profiles.get(k).unwrap();
            let (lt, ld, le) = levels[i];
            let thr = achieved(p, KpiKind::Throughput, lt, 1e6);
            ClassKpi {
                kind: k,
                ues: ues[i],
                throughput_bps: thr * ues[i] as f64,
                per_ue_throughput_bps: thr,
                mean_delay_s: achieved(p, KpiKind::Delay, ld, 0.001),
                energy_efficiency: achieved(p, KpiKind::EnergyEfficiency, le, 1e6),
            }
        })
        .collect();
    KpiSnapshot {
        duration_s: 1.0,
        throughput_bps: 1e7,
        mean_delay_s: 0.01,
        energy_efficiency: 1e6,
        total_energy_j: 10.0,
        offered_bps: 1e7,
        per_class,
    }
}

/// Exhaustive grid over intent type and sign, forecast position relative to
/// both thresholds, target class, profile set and shared achievement levels,
/// with per-class levels and UE counts drawn from a seeded stream.
pub fn grid() -> Vec<Case> {
    let cfg = ValidationConfig { th_t: 8e6, th_p: 40e6, window: 12, ..Default::default() };
    let forecasts = [1e6, 8e6, 20e6, 40e6, 90e6];
    let targets = [None, Some(TrafficKind::Video), Some(TrafficKind::Gaming), Some(TrafficKind::Voice), Some(TrafficKind::Urllc)];
    let mut rng = ChaCha8Rng::seed_from_u64(0xA162);
    let mut out = Vec::new();
    for profiles in [QosProfiles::default(), custom_profiles()] {
        for kind in KpiKind::ALL {
            for sign in [1.0, -1.0] {
                for &t_p in &forecasts {
                    for target in targets {
                        for lt in 0..3 {
                            for ld in 0..3 {
                                let mut levels = [(lt, ld, 1); 4];
                                if rng.random_bool(0.5) {
                                    let i = rng.random_range(0..4);
                                    levels[i] = (rng.random_range(0..3), rng.random_range(0..3), rng.random_range(0..3));
                                }
                                let ues = std::array::from_fn(|_| if rng.random_bool(0.2) { 0 } else { 5 });
                                let history: Vec<f64> = (0..12).map(|_| rng.random_range(1e6..60e6)).collect();
                                out.push(Case {
                                    kind,
                                    magnitude_pct: sign * 10.0,
                                    target_class: target,
                                    t_p,
                                    cfg,
                                    snapshot: snapshot(&profiles, &levels, ues),
                                    profiles: profiles.clone(),
                                    history,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Number of grid cases that disagree with the reference, with the first
/// disagreement.
pub fn run_grid() -> (usize, usize, Option<String>) {
    let cases = grid();
    let mut bad = 0;
    let mut first = None;
    for c in &cases {
        if let Err(e) = check(c) {
            bad += 1;
            first.get_or_insert(e);
        }
    }
    (cases.len(), bad, first)
}
