//! Run directory layout and the files written into it.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use intent_ran::apps::AppCheckpoint;
use intent_ran::hrl::HrlCheckpoint;
use intent_ran::runtime::{AppChange, IntentRecord, PipelineEvent, TickOutput};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const CONFIG: &str = "config";
pub const KPIS: &str = "kpis.csv";
pub const INTENTS: &str = "intents.log";
pub const EVENTS: &str = "events.log";
pub const TRAFFIC: &str = "traffic.csv";
pub const RECORD: &str = "run.json";
pub const CHECKPOINTS: &str = "checkpoints";

pub const KPI_HEADER: [&str; 6] = ["slot", "throughput_bps", "mean_delay_s", "ee_bits_per_joule", "energy_j", "class"];

/// One `kpis.csv` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiRow {
    pub slot: u64,
    pub throughput_bps: f64,
    pub mean_delay_s: f64,
    pub ee_bits_per_joule: f64,
    pub energy_j: f64,
    /// `all` for the aggregate row, else the traffic class.
    pub class: String,
}

/// Aggregate row followed by one row per class.
pub fn kpi_rows(out: &TickOutput) -> Vec<KpiRow> {
    let k = &out.kpi;
    let mut rows = vec![KpiRow {
        slot: out.end_slot,
        throughput_bps: k.throughput_bps,
        mean_delay_s: k.mean_delay_s,
        ee_bits_per_joule: k.energy_efficiency,
        energy_j: k.total_energy_j,
        class: "all".into(),
    }];
    rows.extend(k.per_class.iter().map(|c| KpiRow {
        slot: out.end_slot,
        throughput_bps: c.throughput_bps,
        mean_delay_s: c.mean_delay_s,
        ee_bits_per_joule: c.energy_efficiency,
        energy_j: k.total_energy_j,
        class: c.kind.to_string(),
    }));
    rows
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRefs {
    pub hrl_initial: String,
    pub apps_initial: String,
    pub hrl_final: Option<String>,
    pub apps_final: Option<String>,
}

/// Summary of a run, rewritten as the run progresses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub scenario: String,
    /// SHA-256 of the `config` file.
    pub config_hash: String,
    pub seed: u64,
    pub ticks: u64,
    pub validation_enabled: bool,
    pub kpi_trace: String,
    pub intent_log: String,
    pub event_log: String,
    pub timeline: Vec<AppChange>,
    pub checkpoints: CheckpointRefs,
}

pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Appends a run's outputs to its directory as ticks complete.
pub struct RunWriter {
    dir: PathBuf,
    kpis: csv::Writer<File>,
    events: BufWriter<File>,
    intents: BufWriter<File>,
    traffic: csv::Writer<File>,
    record: RunRecord,
}

impl RunWriter {
    /// Creates `dir` and writes the config and initial checkpoints.
    pub fn create(
        dir: &Path,
        run_id: &str,
        config_text: &str,
        seed: u64,
        validation_enabled: bool,
        initial: (&HrlCheckpoint, &AppCheckpoint),
    ) -> anyhow::Result<Self> {
        fs::create_dir_all(dir.join(CHECKPOINTS))?;
        fs::write(dir.join(CONFIG), config_text)?;
        let hrl_initial = format!("{CHECKPOINTS}/hrl_initial.json");
        let apps_initial = format!("{CHECKPOINTS}/apps_initial.json");
        fs::write(dir.join(&hrl_initial), initial.0.to_json())?;
        fs::write(dir.join(&apps_initial), initial.1.to_json())?;
        let mut kpis = csv::WriterBuilder::new().has_headers(false).from_path(dir.join(KPIS))?;
        kpis.write_record(KPI_HEADER)?;
        kpis.flush()?;
        let mut traffic = csv::Writer::from_path(dir.join(TRAFFIC))?;
        traffic.write_record(["tick", "offered_bps"])?;
        traffic.flush()?;
        let record = RunRecord {
            run_id: run_id.to_string(),
            scenario: String::new(),
            config_hash: config_hash(config_text),
            seed,
            ticks: 0,
            validation_enabled,
            kpi_trace: KPIS.into(),
            intent_log: INTENTS.into(),
            event_log: EVENTS.into(),
            timeline: Vec::new(),
            checkpoints: CheckpointRefs { hrl_initial, apps_initial, hrl_final: None, apps_final: None },
        };
        let w = RunWriter {
            kpis,
            traffic,
            events: BufWriter::new(File::create(dir.join(EVENTS))?),
            intents: BufWriter::new(File::create(dir.join(INTENTS))?),
            dir: dir.to_path_buf(),
            record,
        };
        Ok(w)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn record_mut(&mut self) -> &mut RunRecord {
        &mut self.record
    }

    pub fn append_pending(&mut self, events: &[PipelineEvent], records: &[IntentRecord]) -> anyhow::Result<()> {
        for e in events {
            serde_json::to_writer(&mut self.events, e)?;
            self.events.write_all(b"\n")?;
        }
        for r in records {
            serde_json::to_writer(&mut self.intents, r)?;
            self.intents.write_all(b"\n")?;
        }
        self.events.flush()?;
        self.intents.flush()?;
        Ok(())
    }

    pub fn append_tick(&mut self, out: &TickOutput, timeline: &[AppChange]) -> anyhow::Result<()> {
        for row in kpi_rows(out) {
            self.kpis.serialize(row)?;
        }
        self.kpis.flush()?;
        self.traffic.write_record([out.tick.to_string(), out.kpi.offered_bps.to_string()])?;
        self.traffic.flush()?;
        self.append_pending(&out.events, &out.records)?;
        self.record.ticks = out.tick + 1;
        self.record.timeline = timeline.to_vec();
        self.write_record()
    }

    pub fn write_record(&self) -> anyhow::Result<()> {
        let tmp = self.dir.join(format!("{RECORD}.tmp"));
        fs::write(&tmp, serde_json::to_string_pretty(&self.record)?)?;
        fs::rename(tmp, self.dir.join(RECORD))?;
        Ok(())
    }

    pub fn finish(mut self, last: (&HrlCheckpoint, &AppCheckpoint)) -> anyhow::Result<RunRecord> {
        let hrl_final = format!("{CHECKPOINTS}/hrl_final.json");
        let apps_final = format!("{CHECKPOINTS}/apps_final.json");
        fs::write(self.dir.join(&hrl_final), last.0.to_json())?;
        fs::write(self.dir.join(&apps_final), last.1.to_json())?;
        self.record.checkpoints.hrl_final = Some(hrl_final);
        self.record.checkpoints.apps_final = Some(apps_final);
        self.write_record()?;
        Ok(self.record)
    }
}

pub fn read_record(dir: &Path) -> anyhow::Result<RunRecord> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.join(RECORD))?)?)
}

pub fn read_kpis(path: &Path) -> anyhow::Result<Vec<KpiRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<Vec<T>> {
    let text = fs::read_to_string(path)?;
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
}
