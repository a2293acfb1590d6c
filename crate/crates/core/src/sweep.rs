//! Policy x device-count x run sweeps with on-disk artifacts.
//!
//! Layout under the output directory:
//!
//! ```text
//! manifest.json
//! records/<policy>_n<N>_r<k>.ndjson   one RunRecord per line
//! summaries/<policy>_n<N>_r<k>.json   per-run MetricsSummary
//! tables/*.csv                        see `tables`
//! ```
//!
//! The run seed is `mix_seed(base_seed, [k])`: it depends on neither the policy
//! nor the device count, so device `i` of run `k` gets the same start offset
//! at every sweep point (common random numbers). Policy randomness is keyed by
//! the policy kind on top of that.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::Error;
use crate::metrics::{summarize, MetricsSummary, RunRecord};
use crate::netsim::run_simulation;
use crate::policy::PolicyKind;
use crate::seed::mix_seed;

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub policy: PolicyKind,
    pub n_devices: usize,
    pub run_index: usize,
    pub seed: u64,
    /// Paths are relative to the manifest's directory.
    pub records: PathBuf,
    pub summary: PathBuf,
    pub records_sha256: String,
}

impl RunEntry {
    pub fn label(&self) -> String {
        format!("{}_n{}_r{}", self.policy, self.n_devices, self.run_index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    pub base_seed: u64,
    pub config: ExperimentConfig,
    pub runs: Vec<RunEntry>,
    pub tables: Vec<PathBuf>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json { path: path.to_path_buf(), source: e })
    }

    pub fn run_seeds(&self) -> Vec<u64> {
        self.runs.iter().map(|r| r.seed).collect()
    }
}

/// Seed of run `run_index`, shared by every sweep point.
pub fn run_seed(base_seed: u64, run_index: usize) -> u64 {
    mix_seed(base_seed, &[run_index as u64])
}

#[derive(Debug, Clone, Copy)]
struct Job {
    policy: PolicyKind,
    n_devices: usize,
    run_index: usize,
    seed: u64,
}

fn plan(cfg: &ExperimentConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for &policy in &cfg.policies {
        for &n_devices in &cfg.device_counts {
            for run_index in 0..cfg.runs_per_point {
                jobs.push(Job { policy, n_devices, run_index, seed: run_seed(cfg.base_seed, run_index) });
            }
        }
    }
    jobs
}

pub fn write_records(path: &Path, records: &[RunRecord]) -> Result<(), Error> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| Error::Json { path: path.to_path_buf(), source: e })?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>, Error> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Json { path: path.to_path_buf(), source: e })?);
    }
    Ok(out)
}

fn sha256_file(path: &Path) -> Result<String, Error> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| Error::Json { path: path.to_path_buf(), source: e })?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

fn execute(cfg: &ExperimentConfig, config_hash: &str, job: Job, out_dir: &Path) -> Result<RunEntry, Error> {
    let sim = cfg.sim_config(job.policy, job.n_devices)?;
    let records = catch_unwind(AssertUnwindSafe(|| run_simulation(&sim, job.seed)))
        .map_err(|p| Error::RunPanicked {
            policy: job.policy.to_string(),
            devices: job.n_devices,
            seed: job.seed,
            message: panic_message(p),
        })??;

    let label = format!("{}_n{}_r{}", job.policy, job.n_devices, job.run_index);
    let records_rel = PathBuf::from("records").join(format!("{label}.ndjson"));
    let summary_rel = PathBuf::from("summaries").join(format!("{label}.json"));
    let records_path = out_dir.join(&records_rel);
    write_records(&records_path, &records)?;
    let summary = summarize(&records, job.policy.name(), job.n_devices, config_hash);
    write_json(&out_dir.join(&summary_rel), &summary)?;

    Ok(RunEntry {
        policy: job.policy,
        n_devices: job.n_devices,
        run_index: job.run_index,
        seed: job.seed,
        records: records_rel,
        summary: summary_rel,
        records_sha256: sha256_file(&records_path)?,
    })
}

fn cleanup(out_dir: &Path, jobs: &[Job]) {
    for job in jobs {
        let label = format!("{}_n{}_r{}", job.policy, job.n_devices, job.run_index);
        let _ = fs::remove_file(out_dir.join("records").join(format!("{label}.ndjson")));
        let _ = fs::remove_file(out_dir.join("summaries").join(format!("{label}.json")));
    }
    let _ = fs::remove_file(out_dir.join("manifest.json"));
}

/// Runs every (policy, device count, run) combination, writes the artifacts
/// and tables, and returns the manifest (also saved as `manifest.json`).
/// On failure the files written by this call are removed.
pub fn run_sweep(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest, Error> {
    cfg.validate()?;
    let config_hash = cfg.config_hash();
    let jobs = plan(cfg);
    for sub in ["records", "summaries"] {
        let dir = out_dir.join(sub);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }

    let threads = cfg.parallel.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");

    let result = pool.install(|| {
        jobs.par_iter()
            .map(|&job| execute(cfg, &config_hash, job, out_dir))
            .collect::<Result<Vec<_>, _>>()
    });
    let runs = match result {
        Ok(runs) => runs,
        Err(e) => {
            cleanup(out_dir, &jobs);
            return Err(e);
        }
    };

    let mut manifest = RunManifest {
        tool_version: TOOL_VERSION.to_string(),
        config_hash,
        base_seed: cfg.base_seed,
        config: ExperimentConfig { parallel: None, ..cfg.clone() },
        runs,
        tables: Vec::new(),
    };
    let finish = |manifest: &mut RunManifest| -> Result<(), Error> {
        manifest.tables = crate::tables::emit_tables(manifest, out_dir, out_dir)?
            .into_iter()
            .map(|p| p.strip_prefix(out_dir).map(Path::to_path_buf).unwrap_or(p))
            .collect();
        write_json(&out_dir.join("manifest.json"), manifest)
    };
    if let Err(e) = finish(&mut manifest) {
        cleanup(out_dir, &jobs);
        return Err(e);
    }
    Ok(manifest)
}

/// Loads the records of one run named in a manifest.
pub fn load_run(entry: &RunEntry, base_dir: &Path) -> Result<Vec<RunRecord>, Error> {
    let path = base_dir.join(&entry.records);
    if !path.exists() {
        return Err(Error::MissingArtifact { run: entry.label(), path });
    }
    read_records(&path)
}

pub fn load_summary(entry: &RunEntry, base_dir: &Path) -> Result<MetricsSummary, Error> {
    let path = base_dir.join(&entry.summary);
    if !path.exists() {
        return Err(Error::MissingArtifact { run: entry.label(), path });
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json { path, source: e })
}
