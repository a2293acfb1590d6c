//! Plot-ready CSV tables recomputed from the record logs of a sweep.
//!
//! Long tables:
//! - `success_rate.csv`, `energy_efficiency.csv`: `policy,n_devices,mean,run_0,...`
//! - `tp_ratio.csv`: `policy,n_devices,power_dbm,fraction` (levels with successes only)
//!
//! Wide tables, one row per x value and one column per series:
//! - `success_rate_wide.csv`, `energy_efficiency_wide.csv`: `n_devices,<policy>...`
//! - `tp_ratio_wide.csv`: `power_dbm,<policy>@<N>...`
//!
//! Plus `summary.json` with the aggregated summary of every sweep point.
//! Undefined values are written as `null`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Error;
use crate::metrics::{aggregate_runs, summarize, MetricsSummary};
use crate::policy::PolicyKind;
use crate::sweep::{load_run, RunManifest};

pub const NULL: &str = "null";

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| NULL.to_string(), |x| x.to_string())
}

pub fn parse_opt(s: &str) -> Result<Option<f64>, std::num::ParseFloatError> {
    if s == NULL {
        Ok(None)
    } else {
        s.parse().map(Some)
    }
}

/// Per-run and aggregated summaries of one sweep point.
#[derive(Debug, Clone)]
pub struct PointSummary {
    pub policy: PolicyKind,
    pub n_devices: usize,
    pub runs: Vec<MetricsSummary>,
    pub aggregate: MetricsSummary,
}

/// Re-reads every record log named in the manifest and summarizes it.
pub fn collect_points(manifest: &RunManifest, base_dir: &Path) -> Result<Vec<PointSummary>, Error> {
    let mut points = Vec::new();
    for &policy in &manifest.config.policies {
        for &n in &manifest.config.device_counts {
            let mut entries: Vec<_> =
                manifest.runs.iter().filter(|r| r.policy == policy && r.n_devices == n).collect();
            entries.sort_by_key(|r| r.run_index);
            if entries.is_empty() {
                return Err(Error::MissingArtifact {
                    run: format!("{policy}_n{n}"),
                    path: base_dir.join("records"),
                });
            }
            let runs = entries
                .iter()
                .map(|e| {
                    let records = load_run(e, base_dir)?;
                    Ok(summarize(&records, policy.name(), n, &manifest.config_hash))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let aggregate = aggregate_runs(&runs)?;
            points.push(PointSummary { policy, n_devices: n, runs, aggregate });
        }
    }
    Ok(points)
}

fn write_metric_table(
    path: &Path,
    points: &[PointSummary],
    value: fn(&MetricsSummary) -> Option<f64>,
) -> Result<(), Error> {
    let max_runs = points.iter().map(|p| p.runs.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["policy".to_string(), "n_devices".into(), "mean".into()];
    header.extend((0..max_runs).map(|i| format!("run_{i}")));
    w.write_record(&header)?;
    for p in points {
        let mut row = vec![p.policy.to_string(), p.n_devices.to_string(), fmt_opt(value(&p.aggregate))];
        row.extend(p.runs.iter().map(|r| fmt_opt(value(r))));
        row.resize(header.len(), NULL.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_metric_wide(
    path: &Path,
    manifest: &RunManifest,
    points: &[PointSummary],
    value: fn(&MetricsSummary) -> Option<f64>,
) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["n_devices".to_string()];
    header.extend(manifest.config.policies.iter().map(|p| p.to_string()));
    w.write_record(&header)?;
    for &n in &manifest.config.device_counts {
        let mut row = vec![n.to_string()];
        for &policy in &manifest.config.policies {
            let point = points.iter().find(|p| p.policy == policy && p.n_devices == n);
            row.push(fmt_opt(point.and_then(|p| value(&p.aggregate))));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_tp_tables(long: &Path, wide: &Path, manifest: &RunManifest, points: &[PointSummary]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(long)?;
    w.write_record(["policy", "n_devices", "power_dbm", "fraction"])?;
    for p in points {
        for (level, frac) in &p.aggregate.tp_ratio {
            w.write_record([p.policy.to_string(), p.n_devices.to_string(), level.to_string(), frac.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io(long, e))?;

    let mut w = csv::Writer::from_path(wide)?;
    let mut header = vec!["power_dbm".to_string()];
    header.extend(points.iter().map(|p| format!("{}@{}", p.policy, p.n_devices)));
    w.write_record(&header)?;
    let mut levels = manifest.config.tx_powers_dbm.clone();
    levels.sort_unstable();
    for level in levels {
        let mut row = vec![level.to_string()];
        row.extend(points.iter().map(|p| p.aggregate.tp_ratio.get(&level).copied().unwrap_or(0.0).to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(wide, e))
}

/// Writes all tables into `out_dir/tables` and returns their paths.
pub fn emit_tables(manifest: &RunManifest, base_dir: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, Error> {
    let points = collect_points(manifest, base_dir)?;
    let dir = out_dir.join("tables");
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let sr = |s: &MetricsSummary| s.success_rate;
    let ee = |s: &MetricsSummary| s.energy_efficiency;
    let paths: Vec<PathBuf> = [
        "success_rate.csv",
        "energy_efficiency.csv",
        "tp_ratio.csv",
        "success_rate_wide.csv",
        "energy_efficiency_wide.csv",
        "tp_ratio_wide.csv",
        "summary.json",
    ]
    .iter()
    .map(|name| dir.join(name))
    .collect();

    write_metric_table(&paths[0], &points, sr)?;
    write_metric_table(&paths[1], &points, ee)?;
    write_tp_tables(&paths[2], &paths[5], manifest, &points)?;
    write_metric_wide(&paths[3], manifest, &points, sr)?;
    write_metric_wide(&paths[4], manifest, &points, ee)?;

    let aggregates: Vec<&MetricsSummary> = points.iter().map(|p| &p.aggregate).collect();
    let mut bytes = serde_json::to_vec_pretty(&aggregates)
        .map_err(|e| Error::Json { path: paths[6].clone(), source: e })?;
    bytes.push(b'\n');
    fs::write(&paths[6], bytes).map_err(|e| Error::io(&paths[6], e))?;
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub policy: String,
    pub n_devices: usize,
    pub mean: Option<f64>,
    pub runs: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TpRow {
    pub policy: String,
    pub n_devices: usize,
    pub power_dbm: i32,
    pub fraction: f64,
}

fn bad(path: &Path, what: &str) -> Error {
    Error::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, what.to_string()))
}

/// Parses `success_rate.csv` or `energy_efficiency.csv`.
pub fn read_metric_table(path: &Path) -> Result<Vec<MetricRow>, Error> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).ok_or_else(|| bad(path, "short row"));
        let num = |s: &str| parse_opt(s).map_err(|_| bad(path, "bad number"));
        let mut runs = Vec::new();
        for i in 3..rec.len() {
            runs.push(num(field(i)?)?);
        }
        rows.push(MetricRow {
            policy: field(0)?.to_string(),
            n_devices: field(1)?.parse().map_err(|_| bad(path, "bad n_devices"))?,
            mean: num(field(2)?)?,
            runs,
        });
    }
    Ok(rows)
}

pub fn read_tp_table(path: &Path) -> Result<Vec<TpRow>, Error> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let get = |i: usize| rec.get(i).ok_or_else(|| bad(path, "short row"));
        rows.push(TpRow {
            policy: get(0)?.to_string(),
            n_devices: get(1)?.parse().map_err(|_| bad(path, "bad n_devices"))?,
            power_dbm: get(2)?.parse().map_err(|_| bad(path, "bad power_dbm"))?,
            fraction: get(3)?.parse().map_err(|_| bad(path, "bad fraction"))?,
        });
    }
    Ok(rows)
}

/// Aggregated summaries keyed by (policy, N), read back from `summary.json`.
pub fn read_summary(path: &Path) -> Result<BTreeMap<(String, usize), MetricsSummary>, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let list: Vec<MetricsSummary> =
        serde_json::from_str(&text).map_err(|e| Error::Json { path: path.to_path_buf(), source: e })?;
    Ok(list.into_iter().map(|s| ((s.policy.clone(), s.n_devices), s)).collect())
}
