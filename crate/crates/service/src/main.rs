use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use intent_ran::hrl::train::{train, training_log_csv, TrainSpec, WarmStart};
use intent_ran::hrl::{HrlAgent, HrlCheckpoint};
use intent_ran::intent::{classify_and_extract, shipped_examples};
use intent_ran::network::Network;
use intent_ran::scenario::ScheduledIntent;
use intent_ran::sim::TrafficKind;
use intent_ran_service::live::Manager;
use intent_ran_service::run::{backend_from_env, load_scenario, replay, run_headless, Overrides};
use intent_ran_service::{api, scorer};

#[derive(Parser)]
#[command(name = "intent-ran", version, about = "Intent-driven RAN orchestration runs, replay and service")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario headless and write a run directory.
    Run {
        /// Shipped scenario name or TOML path.
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        ticks: Option<u64>,
        /// Intent text; pair each with an --at-tick.
        #[arg(long = "intent")]
        intents: Vec<String>,
        #[arg(long = "at-tick")]
        at_ticks: Vec<u64>,
        /// Traffic class the intents target.
        #[arg(long, value_parser = parse_class)]
        target_class: Option<TrafficKind>,
        /// Skip intent validation (ablation).
        #[arg(long)]
        no_validation: bool,
        /// Controller checkpoint to start from.
        #[arg(long)]
        hrl_checkpoint: Option<PathBuf>,
        /// Scorer weights file to use instead of the built-in weights.
        #[arg(long)]
        theta: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-execute a persisted run and compare its outputs byte for byte.
    Replay { run_dir: PathBuf },
    /// Write capability-oracle labels for the attention scorer.
    GenerateLabels {
        #[arg(long, default_value_t = 10)]
        states: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the attention scorer on a label file.
    TrainScorer {
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the controller for one intent and write a checkpoint and training log.
    Train {
        scenario: String,
        #[arg(long)]
        intent: String,
        #[arg(long, default_value_t = 40)]
        episodes: usize,
        #[arg(long, default_value_t = 10)]
        episode_ticks: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        no_attention: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, default_value = "runs")]
        data_dir: PathBuf,
    },
}

fn parse_class(s: &str) -> Result<TrafficKind, String> {
    TrafficKind::parse(s).ok_or_else(|| format!("unknown traffic class {s}; use video, gaming, voice or urllc"))
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().cmd {
        Cmd::Run { scenario, seed, ticks, intents, at_ticks, target_class, no_validation, hrl_checkpoint, theta, out } => {
            if intents.len() != at_ticks.len() {
                bail!("each --intent needs a matching --at-tick ({} vs {})", intents.len(), at_ticks.len());
            }
            let intents = intents
                .into_iter()
                .zip(at_ticks)
                .map(|(text, at_tick)| ScheduledIntent { at_tick, text, target_class })
                .collect();
            let o = Overrides { seed, ticks, validation_enabled: no_validation.then_some(false), intents };
            let mut s = o.apply(load_scenario(&scenario)?);
            if let Some(p) = theta {
                s.hrl.attention.theta = Some(scorer::read_theta(&p)?.theta);
            }
            let hrl = match hrl_checkpoint {
                Some(p) => Some(HrlCheckpoint::from_json(&fs::read_to_string(&p)?).with_context(|| p.display().to_string())?),
                None => None,
            };
            let rec = run_headless(s, hrl.as_ref(), &out, backend_from_env())?;
            println!("{}", serde_json::to_string_pretty(&rec)?);
        }
        Cmd::Replay { run_dir } => {
            let report = replay(&run_dir, backend_from_env())?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.identical() {
                bail!("replay diverged from the recorded run");
            }
        }
        Cmd::GenerateLabels { states, seed, out } => {
            let n = scorer::write_labels(&out, states, seed)?;
            println!("wrote {n} labels to {}", out.display());
        }
        Cmd::TrainScorer { labels, out } => {
            let f = scorer::train_from_file(&labels, &out)?;
            println!(
                "train accuracy {:.4}, held-out accuracy {:.4} ({} / {} samples)",
                f.train_accuracy, f.holdout_accuracy, f.train_samples, f.holdout_samples
            );
        }
        Cmd::Train { scenario, intent, episodes, episode_ticks, seed, no_attention, out } => {
            let s = load_scenario(&scenario)?;
            let p = classify_and_extract(&intent, &shipped_examples(), None)?;
            let net = Network::new(s.sim.clone(), &s.traffic, s.apps, s.qos.profiles()?)?;
            let warm = WarmStart::new(net, s.baseline()?, 10, 3);
            let mut cfg = s.hrl.clone();
            cfg.use_attention = !no_attention;
            let mut agent = HrlAgent::new(cfg)?;
            let spec = TrainSpec { kpi: p.kind, magnitude_pct: p.magnitude_pct, episodes, episode_ticks, seed };
            let log = train(&mut agent, &warm, &spec)?;
            fs::create_dir_all(&out)?;
            fs::write(out.join("training.csv"), training_log_csv(&log))?;
            fs::write(out.join("hrl.json"), agent.checkpoint().to_json())?;
            println!("trained {episodes} episodes; wrote {}", out.display());
        }
        Cmd::Serve { addr, data_dir } => {
            fs::create_dir_all(&data_dir)?;
            let manager = Arc::new(Manager::new(data_dir, backend_from_env()));
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr).await?;
                tracing::info!(%addr, "serving");
                axum::serve(listener, api::router(manager)).await?;
                anyhow::Ok(())
            })?;
        }
    }
    Ok(())
}
