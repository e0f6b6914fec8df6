//! Acceptance suite: one PASS/FAIL line per primary criterion.
//!
//! Run with `cargo test -p intent-ran-service --test acceptance`; the process
//! exits non-zero if any criterion fails.

#[path = "../../core/tests/support/alg2_oracle.rs"]
mod alg2_oracle;
#[path = "../../core/tests/support/stub_http.rs"]
mod stub_http;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use intent_ran::apps::{AppId, AppSet};
use intent_ran::hrl::train::{
    episodes_to_threshold, evaluate, greedy_action, train, Policy, TrainSpec, WarmStart,
};
use intent_ran::hrl::{
    attention_scores, compute_rewards, filter_actions, Extrinsic, Goal, HrlAgent, StateSummary,
};
use intent_ran::intent::{
    classify_and_extract, shipped_examples, FnBackend, HttpBackend, IntentSource, LlmBackend, LlmBackendConfig,
};
use intent_ran::network::Network;
use intent_ran::runtime::{PipelineStep, Runtime};
use intent_ran::scenario::{builtin, Scenario, BUILTIN};
use intent_ran::sim::traffic::class_stream;
use intent_ran::sim::{KpiKind, TrafficClass, TrafficKind};
use intent_ran_service::run::run_headless;
use intent_ran_service::store::{EVENTS, KPIS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PARSE_BUDGET: Duration = Duration::from_secs(1);
const ORACLE_MIN_CASES: usize = 1000;
const ORACLE_BUDGET: Duration = Duration::from_secs(10);
const FIG4_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const FIG4_INJECT_TICK: usize = 30;
/// Ticks skipped before the pre-injection window opens.
const FIG4_WARMUP: usize = 10;
const FIG4_MIN_DROP: f64 = 0.10;
const FIG4_MAX_DRIFT: f64 = 0.02;
const FIG4_ARM_BUDGET: Duration = Duration::from_secs(60);
const ATTENTION_MAX_SET: usize = 12;
const ATTENTION_STATES: usize = 10;
const TRAIN_SCENARIO: &str = "dense_video";
const SCENARIO_KPI: KpiKind = KpiKind::Throughput;
const TRAIN_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const TRAIN_EPISODES: usize = 40;
const EPISODE_TICKS: u32 = 10;
const EVAL_EPISODES: u64 = 3;
const THRESHOLD_WINDOW: usize = 3;
const CONVERGENCE_BUDGET: Duration = Duration::from_secs(15 * 60);
const FIG5_MIN_AGREE: usize = 4;
const IDENTITY_CASES: usize = 10_000;
/// Bound on |a - b| / max(|a|, |b|, 1) for quantities computed two ways.
const MACHINE_REL: f64 = 4.0 * f64::EPSILON;

type Verdict = Result<String, String>;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

fn within_budget(label: &str, took: Duration, budget: Duration) -> Result<(), String> {
    if took <= budget {
        Ok(())
    } else {
        Err(format!("{label} took {took:.2?}, budget {budget:.0?}"))
    }
}

fn canonical() -> [(&'static str, KpiKind, f64); 3] {
    [
        ("Increase overall energy efficiency by 10%", KpiKind::EnergyEfficiency, 10.0),
        ("Boost system throughput by 15%", KpiKind::Throughput, 15.0),
        ("Reduce network delay by 13%", KpiKind::Delay, -13.0),
    ]
}

fn scripted_reply(prompt: &str) -> String {
    let intent = prompt.lines().find_map(|l| l.strip_prefix("New Intent: ")).unwrap_or_default();
    match intent {
        "Increase overall energy efficiency by 10%" => "Type: energy_efficiency\nKeywords: energy efficiency, 10%",
        "Boost system throughput by 15%" => "Type: throughput\nKeywords: throughput, 15%",
        "Reduce network delay by 13%" => "Type: delay\nKeywords: delay, 13%",
        _ => "Type: unknown\nKeywords: none",
    }
    .to_string()
}

fn intent_parsing() -> Verdict {
    let ex = shipped_examples();
    let http = stub_http::spawn(|body| stub_http::Reply::Text(scripted_reply(body)));
    let mut cfg = LlmBackendConfig::new(&http.url);
    cfg.timeout = Duration::from_secs(1);
    let http = HttpBackend::new(cfg).map_err(|e| e.to_string())?;
    let scripted = FnBackend::new(|p: &intent_ran::intent::PromptText| Ok(scripted_reply(p.as_str())));
    let paths: [(&str, Option<&dyn LlmBackend>, IntentSource); 3] = [
        ("fallback", None, IntentSource::Fallback),
        ("scripted", Some(&scripted), IntentSource::Llm),
        ("http-stub", Some(&http), IntentSource::Llm),
    ];
    let mut worst = Duration::ZERO;
    for (name, backend, source) in paths {
        for (text, kind, pct) in canonical() {
            let t0 = Instant::now();
            let p = classify_and_extract(text, &ex, backend).map_err(|e| format!("{name}: {text}: {e}"))?;
            worst = worst.max(t0.elapsed());
            if (p.kind, p.magnitude_pct, p.source) != (kind, pct, source) {
                return Err(format!("{name}: {text} gave ({}, {}, {:?})", p.kind, p.magnitude_pct, p.source));
            }
        }
    }
    within_budget("slowest parse", worst, PARSE_BUDGET)?;
    Ok(format!("3 intents x 3 paths exact; slowest {worst:.1?}"))
}

fn oracle_equivalence() -> Verdict {
    let t0 = Instant::now();
    let (n, bad, first) = alg2_oracle::run_grid();
    let took = t0.elapsed();
    if n < ORACLE_MIN_CASES {
        return Err(format!("grid has {n} cases"));
    }
    if bad > 0 {
        return Err(format!("{bad}/{n} disagree; first: {}", first.unwrap_or_default()));
    }
    within_budget("grid", took, ORACLE_BUDGET)?;
    Ok(format!("{n}/{n} tuples agree in {took:.2?}"))
}

/// Relative EE change after the scheduled intent and whether it was rejected.
fn fig4_arm(seed: u64, validation: bool) -> Result<(f64, bool), String> {
    let mut s = builtin("low_traffic").ok_or("low_traffic missing")?;
    s.sim.seed = seed;
    s.validation_enabled = validation;
    if !s.intents.iter().any(|i| i.at_tick as usize == FIG4_INJECT_TICK) {
        return Err("low_traffic has no intent at the injection tick".into());
    }
    let ticks = s.ticks as usize;
    let mut rt = Runtime::new(s, shipped_examples()).map_err(|e| e.to_string())?;
    let (mut pre, mut post) = (Vec::new(), Vec::new());
    let mut rejected = false;
    let mut offered = 0.0;
    for t in 0..ticks {
        let o = rt.step_tick();
        rejected |= o.events.iter().any(|e| e.step == PipelineStep::Validated && !e.ok);
        if (FIG4_WARMUP..FIG4_INJECT_TICK).contains(&t) {
            pre.push(o.kpi.energy_efficiency);
            offered += o.kpi.offered_bps;
        } else if t >= FIG4_INJECT_TICK {
            post.push(o.kpi.energy_efficiency);
        }
    }
    let offered = offered / pre.len() as f64;
    if !(2e6..10e6).contains(&offered) {
        return Err(format!("offered load {offered:.3e} bit/s is not near 5 Mbit/s"));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok((mean(&post) / mean(&pre) - 1.0, rejected))
}

fn fig4() -> Verdict {
    let mut detail = Vec::new();
    let mut fail = Vec::new();
    for validation in [false, true] {
        let t0 = Instant::now();
        let mut changes = Vec::new();
        let mut rejections = 0;
        for seed in FIG4_SEEDS {
            let (c, rej) = fig4_arm(seed, validation)?;
            changes.push(c);
            rejections += rej as usize;
        }
        let took = t0.elapsed();
        let per_seed = took / FIG4_SEEDS.len() as u32;
        if let Err(e) = within_budget("arm", per_seed, FIG4_ARM_BUDGET) {
            fail.push(e);
        }
        let m = median(changes.clone());
        let label = if validation { "on" } else { "off" };
        detail.push(format!("validation {label}: median EE change {:+.1}%, rejected {rejections}/5", 100.0 * m));
        if validation {
            if rejections != FIG4_SEEDS.len() {
                fail.push(format!("intent accepted on {} seeds", FIG4_SEEDS.len() - rejections));
            }
            if m.abs() > FIG4_MAX_DRIFT {
                fail.push(format!("EE moved {:+.2}% with validation on", 100.0 * m));
            }
        } else {
            if rejections != 0 {
                fail.push("intent rejected with validation off".into());
            }
            if m > -FIG4_MIN_DROP {
                fail.push(format!("EE dropped only {:.1}% with validation off", -100.0 * m));
            }
        }
    }
    if fail.is_empty() { Ok(detail.join("; ")) } else { Err(format!("{}; {}", fail.join("; "), detail.join("; "))) }
}

/// States reached by the shipped scenarios after a few ticks, cycling over
/// scenarios and seeds.
fn shipped_states(n: usize) -> Result<Vec<(String, StateSummary)>, String> {
    let mut out = Vec::new();
    for i in 0..n {
        let (name, _) = BUILTIN[i % BUILTIN.len()];
        let mut s = builtin(name).ok_or("missing scenario")?;
        s.sim.seed = 1 + i as u64;
        s.intents.clear();
        let mut rt = Runtime::new(s, shipped_examples()).map_err(|e| e.to_string())?;
        for _ in 0..3 + i {
            rt.step_tick();
        }
        out.push((name.to_string(), StateSummary::of(rt.network().sim().state())));
    }
    Ok(out)
}

fn attention_filtering() -> Verdict {
    let states = shipped_states(ATTENTION_STATES)?;
    let mut largest = 0;
    let mut fallbacks = 0;
    let mut checked = 0;
    for (name, s) in &states {
        let sc = builtin(name).ok_or("missing scenario")?;
        let agent = HrlAgent::new(sc.hrl.clone()).map_err(|e| e.to_string())?;
        for kpi in KpiKind::ALL {
            let scores = attention_scores(s, kpi, agent.theta.as_ref()).map_err(|e| e.to_string())?;
            checked += AppSet::NUM_ACTIONS;
            let f = filter_actions(&scores, agent.cfg.attention.epsilon);
            if f.fallback {
                fallbacks += 1;
            } else if f.len() > ATTENTION_MAX_SET {
                return Err(format!("{name} {kpi}: {} actions kept", f.len()));
            }
            largest = largest.max(f.len());
            if !f.actions.iter().any(|a| a.covers(kpi)) {
                return Err(format!("{name} {kpi}: no kept action can improve {kpi}"));
            }
            if f != agent.filtered(s, kpi).set {
                return Err(format!("{name} {kpi}: agent filtering differs from the scorer"));
            }
        }
    }
    Ok(format!(
        "{checked} scores over {} states x 3 types; largest set {largest}/31, {fallbacks} fallbacks",
        states.len()
    ))
}

fn warm_start(name: &str, seed: u64) -> Result<(Scenario, WarmStart), String> {
    let mut s = builtin(name).ok_or("missing scenario")?;
    s.sim.seed = seed;
    let profiles = s.qos.profiles().map_err(|e| e.to_string())?;
    let net = Network::new(s.sim.clone(), &s.traffic, s.apps, profiles).map_err(|e| e.to_string())?;
    let baseline = s.baseline().map_err(|e| e.to_string())?;
    Ok((s.clone(), WarmStart::new(net, baseline, 10, 3)))
}

fn trained(s: &Scenario, warm: &WarmStart, spec: &TrainSpec, attention: bool) -> Result<(HrlAgent, Vec<f64>), String> {
    let mut cfg = s.hrl.clone();
    cfg.use_attention = attention;
    let mut agent = HrlAgent::new(cfg).map_err(|e| e.to_string())?;
    let log = train(&mut agent, warm, spec).map_err(|e| e.to_string())?;
    Ok((agent, log.iter().map(|l| l.extrinsic_reward).collect()))
}

fn convergence() -> Verdict {
    let t0 = Instant::now();
    let intents = [(KpiKind::Throughput, 10.0), (KpiKind::Delay, -10.0), (KpiKind::EnergyEfficiency, 10.0)];
    let mut detail = Vec::new();
    let mut fail = Vec::new();
    for (kpi, pct) in intents {
        let matching: Vec<AppId> = AppId::ALL.into_iter().filter(|a| AppSet::from_apps(&[*a]).covers(kpi)).collect();
        let (mut e_att, mut e_flat) = (Vec::new(), Vec::new());
        let mut short = 0;
        for seed in TRAIN_SEEDS {
            let (s, warm) = warm_start(TRAIN_SCENARIO, seed)?;
            let spec = TrainSpec { kpi, magnitude_pct: pct, episodes: TRAIN_EPISODES, episode_ticks: EPISODE_TICKS, seed };
            let mut best_single = f64::NEG_INFINITY;
            let mut singles = Vec::new();
            for &app in &matching {
                let r = evaluate(&warm, &spec, Policy::Fixed(AppSet::from_apps(&[app])), EVAL_EPISODES)
                    .map_err(|e| e.to_string())?;
                best_single = best_single.max(r);
                singles.push((app, r));
            }
            let to_ep = |rewards: &[f64]| {
                let log: Vec<_> = rewards
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| intent_ran::hrl::train::EpisodeLog {
                        episode: i,
                        extrinsic_reward: r,
                        filtered_set_size: 0.0,
                        epsilon2: 0.0,
                    })
                    .collect();
                episodes_to_threshold(&log, best_single, THRESHOLD_WINDOW).map_or((TRAIN_EPISODES + 1) as f64, |e| e as f64)
            };
            let (att, r_att) = trained(&s, &warm, &spec, true)?;
            let (_, r_flat) = trained(&s, &warm, &spec, false)?;
            e_att.push(to_ep(&r_att));
            e_flat.push(to_ep(&r_flat));
            let final_att = evaluate(&warm, &spec, Policy::Agent { agent: &att, epsilon2: 0.0 }, EVAL_EPISODES)
                .map_err(|e| e.to_string())?;
            for (app, r) in singles {
                if final_att < r - 1e-9 {
                    short += 1;
                    fail.push(format!("{kpi} seed {seed}: attention-HRL {final_att:.2} < {app} {r:.2}"));
                }
            }
        }
        let (ma, mf) = (median(e_att), median(e_flat));
        // ordering is judged on the scenario's own intent; other types are reported only
        let judged = kpi == SCENARIO_KPI;
        if judged && ma > mf {
            fail.push(format!("{kpi}: median episodes-to-threshold {ma} (attention) > {mf} (no attention)"));
        }
        let tag = if judged { "" } else { " (not judged)" };
        detail.push(format!("{kpi}: median episodes {ma} vs {mf}{tag}, {short} baseline shortfalls"));
    }
    let took = t0.elapsed();
    within_budget("training", took, CONVERGENCE_BUDGET).map_err(|e| format!("{e}; {}", detail.join("; ")))?;
    if fail.is_empty() {
        Ok(format!("{} in {took:.0?}", detail.join("; ")))
    } else {
        Err(format!("{}; {}", fail.join("; "), detail.join("; ")))
    }
}

fn fig5() -> Verdict {
    let want: [(f64, &[AppId]); 3] = [
        (5.0, &[AppId::App1]),
        (10.0, &[AppId::App1, AppId::App3]),
        (20.0, &[AppId::App1, AppId::App3, AppId::App4]),
    ];
    let mut detail = Vec::new();
    let mut ok = true;
    for (pct, required) in want {
        let required = AppSet::from_apps(required);
        let mut agree = 0;
        let mut picks = Vec::new();
        for seed in TRAIN_SEEDS {
            let (s, warm) = warm_start(TRAIN_SCENARIO, seed)?;
            let spec = TrainSpec {
                kpi: KpiKind::Throughput,
                magnitude_pct: pct,
                episodes: TRAIN_EPISODES,
                episode_ticks: EPISODE_TICKS,
                seed,
            };
            let (agent, _) = trained(&s, &warm, &spec, true)?;
            let a = greedy_action(&agent, &warm, KpiKind::Throughput, pct).map_err(|e| e.to_string())?;
            if a.is_superset_of(required) && !a.contains(AppId::App2) {
                agree += 1;
            }
            picks.push(a.to_string());
        }
        ok &= agree >= FIG5_MIN_AGREE;
        detail.push(format!("{pct}%: {agree}/5 [{}]", picks.join(" ")));
    }
    if ok { Ok(detail.join("; ")) } else { Err(detail.join("; ")) }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1D);
    let mut worst: f64 = 0.0;
    for i in 0..IDENTITY_CASES {
        let kpi = KpiKind::ALL[rng.random_range(0..3)];
        let mag = rng.random_range(1.0..60.0);
        let signed = if kpi.higher_is_better() { mag } else { -mag };
        let baseline = 10f64.powf(rng.random_range(-3.0..9.0));
        let g = Goal::new(kpi, signed, baseline, 10).map_err(|e| e.to_string())?;
        let target = if kpi.higher_is_better() { baseline * (1.0 + mag / 100.0) } else { baseline * (1.0 - mag / 100.0) };
        worst = worst.max(rel(g.target_value, target));
        let mut ext = Extrinsic::default();
        let mut sum = 0.0;
        let steps = rng.random_range(1..20);
        for _ in 0..steps {
            let achieved = baseline * rng.random_range(0.0..2.0);
            let v = rng.random_range(0..50usize);
            let pen = rng.random_range(0.0..1.0);
            let r = compute_rewards(&g, achieved, v, pen).map_err(|e| e.to_string())?;
            let c = ((achieved - baseline) / (target - baseline)).clamp(-1.0, 1.0);
            worst = worst.max(rel(r.c_rho, c));
            if r.r_in != r.c_rho - pen * v as f64 {
                return Err(format!("case {i}: r_in {} != C - penalty * violations", r.r_in));
            }
            ext.push(r.r_in);
            sum += r.r_in;
        }
        if ext.sum != sum || ext.steps != steps {
            return Err(format!("case {i}: extrinsic {} over {} != {sum} over {steps}", ext.sum, ext.steps));
        }
    }
    if worst > MACHINE_REL {
        return Err(format!("largest relative deviation {worst:.2e}"));
    }
    let mut gens = Vec::new();
    for kind in TrafficKind::ALL {
        let class = TrafficClass::default_for(kind);
        let (tol, n) = class.distribution.mean_tolerance();
        let sampler = class.gap_sampler().map_err(|e| e.to_string())?;
        let mut rng = class_stream(42, kind);
        let m = (0..n).map(|_| sampler.sample(&mut rng)).sum::<f64>() / n as f64;
        let err = m / class.mean_interarrival_s - 1.0;
        if err.abs() >= tol {
            return Err(format!("{kind}: mean gap off by {:+.2}% (tolerance {:.0}%)", 100.0 * err, 100.0 * tol));
        }
        gens.push(format!("{kind} {:+.2}%", 100.0 * err));
    }
    Ok(format!("{IDENTITY_CASES} cases, worst rel dev {worst:.1e}; mean gaps {}", gens.join(", ")))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut detail = Vec::new();
    for name in ["low_traffic", "high_traffic"] {
        let mut s = builtin(name).ok_or("missing scenario")?;
        if s.intents.is_empty() {
            s.intents.push(intent_ran::scenario::ScheduledIntent {
                at_tick: 30,
                text: "Increase throughput by 10%".into(),
                target_class: None,
            });
        }
        let mut files = Vec::new();
        for k in 0..2 {
            let out = dir.path().join(format!("{name}-{k}"));
            run_headless(s.clone(), None, &out, None).map_err(|e| e.to_string())?;
            files.push((std::fs::read(out.join(KPIS)).map_err(|e| e.to_string())?, std::fs::read(out.join(EVENTS)).map_err(|e| e.to_string())?));
        }
        if files[0].0 != files[1].0 {
            return Err(format!("{name}: {KPIS} differs"));
        }
        if files[0].1 != files[1].1 {
            return Err(format!("{name}: {EVENTS} differs"));
        }
        if files[0].1.is_empty() {
            return Err(format!("{name}: no pipeline events written"));
        }
        detail.push(format!("{name} ({} + {} bytes)", files[0].0.len(), files[0].1.len()));
    }
    Ok(format!("byte-identical: {}", detail.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("intent parsing exactness", intent_parsing),
        ("validation oracle equivalence", oracle_equivalence),
        ("traffic-aware rejection (low-load EE)", fig4),
        ("attention filtering effect", attention_filtering),
        ("convergence ordering", convergence),
        ("goal-to-apps mapping", fig5),
        ("reward identities and generator statistics", identities),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = t0.elapsed();
        match verdict {
            Ok(d) => println!("PASS [{}] {name}: {d} ({took:.1?})", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL [{}] {name}: {d} ({took:.1?})", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
