//! Seeded Monte-Carlo experiments with CSV/JSON reports and config-declared targets.

mod experiments;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sampling::SeededRng;

pub const WORKERS_ENV: &str = "INCOMPAT_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    TwoProjDisc,
    TwoProjUnbalanced,
    ManyProjWitness,
    TwoBases,
    ManyBases,
    InducedPovm,
    Moments,
    KestenMckay,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::TwoProjDisc,
        ExperimentKind::TwoProjUnbalanced,
        ExperimentKind::ManyProjWitness,
        ExperimentKind::TwoBases,
        ExperimentKind::ManyBases,
        ExperimentKind::InducedPovm,
        ExperimentKind::Moments,
        ExperimentKind::KestenMckay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::TwoProjDisc => "two_proj_disc",
            ExperimentKind::TwoProjUnbalanced => "two_proj_unbalanced",
            ExperimentKind::ManyProjWitness => "many_proj_witness",
            ExperimentKind::TwoBases => "two_bases",
            ExperimentKind::ManyBases => "many_bases",
            ExperimentKind::InducedPovm => "induced_povm",
            ExperimentKind::Moments => "moments",
            ExperimentKind::KestenMckay => "kesten_mckay",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Ancilla dimension for induced POVMs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Rank fractions: rank = floor(alpha d).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alphas: Vec<f64>,
    /// Noise values, or moment orders for `moments`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t_grid: Vec<f64>,
    /// c = d/(kn) values for the induced-POVM threshold table.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub c_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Monte-Carlo samples per trial (moments) or random candidates (sampled η).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Largest d at which the SDP is run alongside the closed-form bounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdp_max_dim: Option<usize>,
    /// Report path without extension; `.csv` and `.json` are written next to it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    #[serde(default)]
    pub targets: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return bad("dims must be a non-empty list of positive integers".into());
        }
        use ExperimentKind::*;
        match self.experiment {
            TwoProjDisc | TwoProjUnbalanced => {
                if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
                    return bad("alphas must be a non-empty list in (0,1)".into());
                }
                if self.experiment == TwoProjUnbalanced
                    && !self.alphas.iter().all(|&a| crate::angles::unbalanced_alpha(a))
                {
                    return bad("two_proj_unbalanced needs alphas outside the disc regime".into());
                }
            }
            ManyProjWitness | KestenMckay | ManyBases => {
                if self.g.unwrap_or(0) < 2 {
                    return bad(format!("{} needs g >= 2", self.experiment.name()));
                }
                if self.experiment != ManyBases && self.dims.iter().any(|d| d % 2 == 1) {
                    return bad("balanced projections need even dims".into());
                }
            }
            TwoBases => {
                if self.dims.contains(&1) {
                    return bad("two_bases needs d >= 2".into());
                }
            }
            InducedPovm => {
                let (k, n) = (self.k.unwrap_or(0), self.n.unwrap_or(0));
                if k < 2 || n == 0 {
                    return bad("induced_povm needs k >= 2 and n >= 1".into());
                }
                if self.dims.iter().any(|&d| d > k * n) {
                    return bad("induced_povm needs d <= k n".into());
                }
            }
            Moments => {
                if self.dims.iter().any(|d| d % 2 == 1) {
                    return bad("moments needs even dims".into());
                }
                if self.t_grid.is_empty() || self.t_grid.iter().any(|p| *p < 0.0 || p.fract() != 0.0) {
                    return bad("moments reads the moment orders from t_grid (non-negative integers)".into());
                }
                if self.samples.unwrap_or(0) < 2 {
                    return bad("moments needs samples >= 2".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub trial: usize,
    pub d: usize,
    pub slot: Option<f64>,
    pub stream: u64,
    pub inputs_hash: String,
    pub status: String,
    pub values: BTreeMap<String, f64>,
}

impl Record {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub d: usize,
    pub slot: Option<f64>,
    pub key: String,
    pub count: usize,
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    pub q05: f64,
    pub median: f64,
    pub q95: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub target: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, target: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => value <= target,
            Relation::AtLeast => value >= target,
        };
        Check { name: name.into(), value, relation, target, passed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    pub records: Vec<Record>,
    pub aggregates: Vec<Aggregate>,
    /// Deterministic side tables (e.g. threshold curves).
    pub table: Vec<BTreeMap<String, f64>>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub excluded: usize,
    pub wall_clock_secs: f64,
}

impl ExperimentReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Records with the given dimension and slot, successful ones only.
    pub fn ok_records(&self, d: usize, slot: Option<f64>) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(move |r| r.ok() && r.d == d && r.slot == slot)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// One row per record; value columns are the sorted union of all keys.
    pub fn to_csv(&self) -> Result<String> {
        let keys: std::collections::BTreeSet<&String> = self.records.iter().flat_map(|r| r.values.keys()).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Io(e.to_string());
        let mut header = vec!["trial", "d", "slot", "stream", "inputs_hash", "status"];
        header.extend(keys.iter().map(|k| k.as_str()));
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.records {
            let mut row = vec![
                r.trial.to_string(),
                r.d.to_string(),
                r.slot.map(|s| s.to_string()).unwrap_or_default(),
                r.stream.to_string(),
                r.inputs_hash.clone(),
                r.status.clone(),
            ];
            row.extend(keys.iter().map(|k| r.values.get(*k).map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    /// Writes `<base>.csv` and `<base>.json`.
    pub fn write(&self, base: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
        let base = base.as_ref();
        if let Some(dir) = base.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let csv = base.with_extension("csv");
        let json = base.with_extension("json");
        std::fs::write(&csv, self.to_csv()?)?;
        std::fs::write(&json, self.to_json()?)?;
        Ok((csv, json))
    }
}

/// First 8 bytes of SHA-256, hex encoded.
fn short_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes())[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) struct Job {
    pub d: usize,
    pub slot: Option<f64>,
    pub trial: usize,
    pub stream: u64,
}

pub(crate) type JobOutput = Result<Vec<(Option<f64>, BTreeMap<String, f64>)>>;

pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn run_jobs<F>(jobs: &[Job], workers: usize, f: F) -> Vec<JobOutput>
where
    F: Fn(&Job) -> JobOutput + Sync,
{
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<JobOutput>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let out = f(&jobs[i]);
                slots.lock().expect("no worker panicked")[i] = Some(out);
            });
        }
    });
    slots.into_inner().expect("no worker panicked").into_iter().map(|o| o.expect("every job ran")).collect()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn aggregate(records: &[Record]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(usize, u64, String), (Option<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.ok()) {
        let slot_key = r.slot.map_or(u64::MAX, f64::to_bits);
        for (k, v) in &r.values {
            groups.entry((r.d, slot_key, k.clone())).or_insert((r.slot, Vec::new())).1.push(*v);
        }
    }
    groups
        .into_iter()
        .map(|((d, _, key), (slot, mut v))| {
            v.sort_by(|a, b| a.total_cmp(b));
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            Aggregate {
                d,
                slot,
                key,
                count: v.len(),
                mean,
                stddev: var.sqrt(),
                min: v[0],
                q05: quantile(&v, 0.05),
                median: quantile(&v, 0.5),
                q95: quantile(&v, 0.95),
                max: v[v.len() - 1],
            }
        })
        .collect()
}

/// Runs a validated config with the default worker count and writes the report
/// when `output_path` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(config, default_workers())
}

pub fn run_experiment_with(config: &ExperimentConfig, workers: usize) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let outer = experiments::outer_slots(config);
    let mut jobs = Vec::new();
    for (di, &d) in config.dims.iter().enumerate() {
        for (si, &slot) in outer.iter().enumerate() {
            for trial in 0..config.trials {
                let stream = ((di as u64) << 40) | ((si as u64) << 24) | trial as u64;
                jobs.push(Job { d, slot, trial, stream });
            }
        }
    }
    let outputs = run_jobs(&jobs, workers, |job| {
        let mut rng = SeededRng::new(config.seed, job.stream);
        experiments::run_job(config, job, &mut rng)
    });
    let mut records = Vec::new();
    let mut excluded = 0;
    for (job, out) in jobs.iter().zip(outputs) {
        let hash = |slot: Option<f64>| {
            let key = format!("{}|{}|{}|{:?}|{}", config.experiment.name(), config.seed, job.d, slot, job.trial);
            short_hash(&key)
        };
        match out {
            Ok(rows) => {
                for (slot, values) in rows {
                    records.push(Record {
                        trial: job.trial,
                        d: job.d,
                        slot,
                        stream: job.stream,
                        inputs_hash: hash(slot),
                        status: "ok".into(),
                        values,
                    });
                }
            }
            Err(e) => {
                // one record per inner slot keeps the record count fixed
                for slot in experiments::inner_slots(config, job.slot) {
                    excluded += 1;
                    records.push(Record {
                        trial: job.trial,
                        d: job.d,
                        slot,
                        stream: job.stream,
                        inputs_hash: hash(slot),
                        status: format!("error: {e}"),
                        values: BTreeMap::new(),
                    });
                }
            }
        }
    }
    let aggregates = aggregate(&records);
    let table = experiments::side_table(config)?;
    let checks = experiments::checks(config, &records);
    let passed = checks.iter().all(|c| c.passed);
    let report = ExperimentReport {
        experiment: config.experiment,
        config: config.clone(),
        records,
        aggregates,
        table,
        checks,
        passed,
        excluded,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    };
    if let Some(path) = &config.output_path {
        report.write(path)?;
    }
    Ok(report)
}
