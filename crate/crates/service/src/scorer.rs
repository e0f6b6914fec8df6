//! Label files and scorer weight files.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use intent_ran::hrl::{capability_labels, sample_states, train_scorer, LabeledSample, Theta, TrainedScorer};
use serde::{Deserialize, Serialize};

pub const THETA_VERSION: u32 = 1;

/// Scorer weights as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaFile {
    pub version: u32,
    pub theta: Theta,
    pub train_accuracy: f64,
    pub holdout_accuracy: f64,
    pub train_samples: usize,
    pub holdout_samples: usize,
}

impl From<TrainedScorer> for ThetaFile {
    fn from(t: TrainedScorer) -> Self {
        ThetaFile {
            version: THETA_VERSION,
            theta: t.theta,
            train_accuracy: t.train_accuracy,
            holdout_accuracy: t.holdout_accuracy,
            train_samples: t.train_samples,
            holdout_samples: t.holdout_samples,
        }
    }
}

pub fn read_theta(path: &Path) -> anyhow::Result<ThetaFile> {
    let f: ThetaFile = serde_json::from_str(&fs::read_to_string(path)?).with_context(|| path.display().to_string())?;
    if f.version != THETA_VERSION {
        bail!("unsupported scorer file version {}", f.version);
    }
    if f.theta.iter().any(|v| !v.is_finite()) {
        bail!("scorer weights must be finite");
    }
    Ok(f)
}

/// Capability-oracle labels over `states` sampled network summaries, one JSON object per line.
pub fn write_labels(path: &Path, states: usize, seed: u64) -> anyhow::Result<usize> {
    let samples = capability_labels(&sample_states(states, seed));
    let mut out = String::new();
    for s in &samples {
        out.push_str(&serde_json::to_string(s)?);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(samples.len())
}

pub fn read_labels(path: &Path) -> anyhow::Result<Vec<LabeledSample>> {
    crate::store::read_jsonl(path)
}

pub fn train_from_file(labels: &Path, out: &Path) -> anyhow::Result<ThetaFile> {
    let samples = read_labels(labels)?;
    let trained = train_scorer(&samples)?;
    let f = ThetaFile::from(trained);
    fs::write(out, serde_json::to_string_pretty(&f)?)?;
    Ok(f)
}
