//! Evaluation metrics computed from per-attempt record logs.
//!
//! Success rate is successes over attempts. Energy efficiency is successes per
//! millijoule of active-mode energy, accumulated over a scope. The headline
//! figure averages the per-device value over devices; the network-wide ratio
//! is reported alongside it. Metrics over an empty scope are `None`, never 0.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::netsim::Cause;
use crate::policy::Phase;

/// One uplink attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_seed: u64,
    pub device: usize,
    pub attempt: u32,
    pub arm_index: usize,
    pub channel_hz: u64,
    pub power_dbm: i32,
    pub cause: Cause,
    pub acked: bool,
    pub reward: f64,
    /// Transmit energy in mJ; 0 when carrier sense aborted the attempt.
    pub e_toa: f64,
    pub e_active: f64,
    /// Seconds since simulation start.
    pub wake_time: f64,
    pub phase: Phase,
    pub tie_candidates: usize,
    pub n_payload: u32,
    pub tx_start: Option<f64>,
    pub tx_end: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Global,
    Device(usize),
    Arm(usize),
}

impl Scope {
    fn contains(self, r: &RunRecord) -> bool {
        match self {
            Scope::Global => true,
            Scope::Device(d) => r.device == d,
            Scope::Arm(a) => r.arm_index == a,
        }
    }
}

/// Mean energy as `sum(value * count / n)` over distinct values, so a scope of
/// identical attempts yields that value exactly.
fn mean_energy<'a>(values: impl Iterator<Item = &'a f64>) -> f64 {
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut n = 0u64;
    for v in values {
        *counts.entry(v.to_bits()).or_default() += 1;
        n += 1;
    }
    counts.into_iter().map(|(bits, c)| f64::from_bits(bits) * (c as f64 / n as f64)).sum()
}

pub fn success_rate(records: &[RunRecord], scope: Scope) -> Result<f64, MetricsError> {
    let (attempts, successes) = records
        .iter()
        .filter(|r| scope.contains(r))
        .fold((0u64, 0u64), |(n, s), r| (n + 1, s + u64::from(r.acked)));
    if attempts == 0 {
        return Err(MetricsError::EmptyScope);
    }
    Ok(successes as f64 / attempts as f64)
}

pub fn energy_efficiency(records: &[RunRecord], scope: Scope) -> Result<f64, MetricsError> {
    let scoped: Vec<&RunRecord> = records.iter().filter(|r| scope.contains(r)).collect();
    if scoped.is_empty() {
        return Err(MetricsError::EmptyScope);
    }
    let successes = scoped.iter().filter(|r| r.acked).count();
    let energy = mean_energy(scoped.iter().map(|r| &r.e_active));
    if energy <= 0.0 {
        return Err(MetricsError::ZeroEnergy);
    }
    // successes / total energy, written as rate over mean energy
    Ok(successes as f64 / scoped.len() as f64 / energy)
}

/// Share of ACKed attempts per power level. Empty when nothing succeeded.
pub fn tp_selection_ratio(records: &[RunRecord]) -> BTreeMap<i32, f64> {
    let mut counts: BTreeMap<i32, u64> = BTreeMap::new();
    for r in records.iter().filter(|r| r.acked) {
        *counts.entry(r.power_dbm).or_default() += 1;
    }
    let total: u64 = counts.values().sum();
    counts.into_iter().map(|(level, n)| (level, n as f64 / total as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmMetrics {
    /// Selections of the arm.
    pub selections: f64,
    pub successes: f64,
    /// successes / selections
    pub success_rate: Option<f64>,
    /// success rate over the mean active energy spent on this arm
    pub energy_efficiency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub policy: String,
    pub n_devices: usize,
    pub config_hash: String,
    /// Number of runs folded into this summary.
    pub runs: usize,
    pub attempts: f64,
    pub successes: f64,
    pub success_rate: Option<f64>,
    /// Per-device cumulative efficiency, averaged over devices.
    pub energy_efficiency: Option<f64>,
    /// Total successes over total energy.
    pub network_energy_efficiency: Option<f64>,
    pub tp_ratio: BTreeMap<i32, f64>,
    pub per_arm: BTreeMap<usize, ArmMetrics>,
    pub causes: BTreeMap<String, f64>,
}

fn cause_name(c: Cause) -> &'static str {
    match c {
        Cause::Success => "success",
        Cause::ChannelNotReceivable => "channel_not_receivable",
        Cause::CarrierBusy => "carrier_busy",
        Cause::Collision => "collision",
    }
}

pub fn summarize(records: &[RunRecord], policy: &str, n_devices: usize, config_hash: &str) -> MetricsSummary {
    let attempts = records.len() as f64;
    let successes = records.iter().filter(|r| r.acked).count() as f64;

    let device_ee: Vec<f64> =
        (0..n_devices).filter_map(|d| energy_efficiency(records, Scope::Device(d)).ok()).collect();
    let energy_efficiency =
        (!device_ee.is_empty()).then(|| device_ee.iter().sum::<f64>() / device_ee.len() as f64);

    let mut by_arm: BTreeMap<usize, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_arm.entry(r.arm_index).or_default().push(r);
    }
    let per_arm = by_arm
        .into_iter()
        .map(|(arm, rs)| {
            let n = rs.len() as f64;
            let s = rs.iter().filter(|r| r.acked).count() as f64;
            let x = s / n;
            let mean_energy = mean_energy(rs.iter().map(|r| &r.e_active));
            let metrics = ArmMetrics {
                selections: n,
                successes: s,
                success_rate: Some(x),
                energy_efficiency: (mean_energy > 0.0).then(|| x / mean_energy),
            };
            (arm, metrics)
        })
        .collect();

    let mut causes: BTreeMap<String, f64> = BTreeMap::new();
    for r in records {
        *causes.entry(cause_name(r.cause).to_string()).or_default() += 1.0;
    }

    MetricsSummary {
        policy: policy.to_string(),
        n_devices,
        config_hash: config_hash.to_string(),
        runs: 1,
        attempts,
        successes,
        success_rate: success_rate(records, Scope::Global).ok(),
        energy_efficiency,
        network_energy_efficiency: energy_efficiency_opt(records),
        tp_ratio: tp_selection_ratio(records),
        per_arm,
        causes,
    }
}

fn energy_efficiency_opt(records: &[RunRecord]) -> Option<f64> {
    energy_efficiency(records, Scope::Global).ok()
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

fn mean_map<K: Ord + Copy>(maps: &[&BTreeMap<K, f64>]) -> BTreeMap<K, f64> {
    let n = maps.len() as f64;
    let mut out: BTreeMap<K, f64> = BTreeMap::new();
    for m in maps {
        for (k, v) in m.iter() {
            *out.entry(*k).or_default() += v;
        }
    }
    out.values_mut().for_each(|v| *v /= n);
    out
}

/// Pointwise mean over runs of one (policy, device count, config) point.
/// Missing map keys count as 0; undefined scalars are skipped.
pub fn aggregate_runs(summaries: &[MetricsSummary]) -> Result<MetricsSummary, MetricsError> {
    let first = summaries.first().ok_or(MetricsError::EmptyScope)?;
    if summaries.iter().any(|s| {
        s.config_hash != first.config_hash || s.policy != first.policy || s.n_devices != first.n_devices
    }) {
        return Err(MetricsError::MixedConfigs);
    }
    if summaries.len() == 1 {
        return Ok(first.clone());
    }
    let n = summaries.len() as f64;
    let mean = |f: fn(&MetricsSummary) -> f64| summaries.iter().map(f).sum::<f64>() / n;

    let tp_maps: Vec<&BTreeMap<i32, f64>> = summaries.iter().map(|s| &s.tp_ratio).collect();
    let cause_maps: Vec<&BTreeMap<String, f64>> = summaries.iter().map(|s| &s.causes).collect();
    let mut causes: BTreeMap<String, f64> = BTreeMap::new();
    for m in &cause_maps {
        for (k, v) in m.iter() {
            *causes.entry(k.clone()).or_default() += v / n;
        }
    }

    let arms: std::collections::BTreeSet<usize> =
        summaries.iter().flat_map(|s| s.per_arm.keys().copied()).collect();
    let per_arm = arms
        .into_iter()
        .map(|arm| {
            let get = |s: &MetricsSummary| s.per_arm.get(&arm).cloned();
            let entries: Vec<Option<ArmMetrics>> = summaries.iter().map(get).collect();
            let metrics = ArmMetrics {
                selections: entries.iter().map(|e| e.as_ref().map_or(0.0, |a| a.selections)).sum::<f64>() / n,
                successes: entries.iter().map(|e| e.as_ref().map_or(0.0, |a| a.successes)).sum::<f64>() / n,
                success_rate: mean_defined(entries.iter().map(|e| e.as_ref().and_then(|a| a.success_rate))),
                energy_efficiency: mean_defined(
                    entries.iter().map(|e| e.as_ref().and_then(|a| a.energy_efficiency)),
                ),
            };
            (arm, metrics)
        })
        .collect();

    Ok(MetricsSummary {
        policy: first.policy.clone(),
        n_devices: first.n_devices,
        config_hash: first.config_hash.clone(),
        runs: summaries.iter().map(|s| s.runs).sum(),
        attempts: mean(|s| s.attempts),
        successes: mean(|s| s.successes),
        success_rate: mean_defined(summaries.iter().map(|s| s.success_rate)),
        energy_efficiency: mean_defined(summaries.iter().map(|s| s.energy_efficiency)),
        network_energy_efficiency: mean_defined(summaries.iter().map(|s| s.network_energy_efficiency)),
        tp_ratio: mean_map(&tp_maps),
        per_arm,
        causes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(device: usize, arm: usize, power: i32, acked: bool, e_active: f64) -> RunRecord {
        RunRecord {
            run_seed: 0,
            device,
            attempt: 0,
            arm_index: arm,
            channel_hz: 921_000_000,
            power_dbm: power,
            cause: if acked { Cause::Success } else { Cause::Collision },
            acked,
            reward: if acked { 1.0 } else { 0.0 },
            e_toa: 5.0,
            e_active,
            wake_time: 0.0,
            phase: Phase::Learned,
            tie_candidates: 1,
            n_payload: 36,
            tx_start: Some(0.005),
            tx_end: Some(0.054),
        }
    }

    #[test]
    fn success_rate_examples() {
        let log: Vec<RunRecord> = (0..200).map(|i| rec(0, 0, -3, i < 150, 200.0)).collect();
        assert_eq!(success_rate(&log, Scope::Global), Ok(0.75));
        assert_eq!(success_rate(&log, Scope::Device(0)), Ok(0.75));
        assert_eq!(success_rate(&log, Scope::Device(1)), Err(MetricsError::EmptyScope));

        let mut log: Vec<RunRecord> = (0..8).map(|i| rec(0, 3, -3, i < 6, 200.0)).collect();
        log.extend((0..4).map(|_| rec(0, 1, -3, false, 200.0)));
        assert_eq!(success_rate(&log, Scope::Arm(3)), Ok(0.75));
        assert_eq!(success_rate(&log, Scope::Arm(1)), Ok(0.0));
    }

    #[test]
    fn energy_efficiency_examples() {
        let log: Vec<RunRecord> = (0..200).map(|i| rec(0, 0, -3, i < 150, 150.0)).collect();
        let ee = energy_efficiency(&log, Scope::Global).unwrap();
        assert!((ee - 5.0e-3).abs() < 1e-15);

        let none: Vec<RunRecord> = (0..10).map(|_| rec(0, 0, -3, false, 150.0)).collect();
        assert_eq!(energy_efficiency(&none, Scope::Global), Ok(0.0));

        let halved: Vec<RunRecord> = log.iter().map(|r| RunRecord { e_active: r.e_active / 2.0, ..r.clone() }).collect();
        assert!((energy_efficiency(&halved, Scope::Global).unwrap() - 2.0 * ee).abs() < 1e-15);

        let zero = vec![rec(0, 0, -3, true, 0.0)];
        assert_eq!(energy_efficiency(&zero, Scope::Global), Err(MetricsError::ZeroEnergy));
    }

    #[test]
    fn tp_ratio_examples() {
        let all_low: Vec<RunRecord> = (0..5).map(|_| rec(0, 0, -3, true, 1.0)).collect();
        assert_eq!(tp_selection_ratio(&all_low), BTreeMap::from([(-3, 1.0)]));

        let mut mixed: Vec<RunRecord> = (0..60).map(|_| rec(0, 0, -3, true, 1.0)).collect();
        mixed.extend((0..40).map(|_| rec(0, 4, 13, true, 1.0)));
        mixed.extend((0..30).map(|_| rec(0, 2, 5, false, 1.0)));
        assert_eq!(tp_selection_ratio(&mixed), BTreeMap::from([(-3, 0.6), (13, 0.4)]));

        assert!(tp_selection_ratio(&[rec(0, 0, 1, false, 1.0)]).is_empty());
    }

    fn summary_with(sr: f64, tp: &[(i32, f64)]) -> MetricsSummary {
        MetricsSummary {
            policy: "fixed".into(),
            n_devices: 10,
            config_hash: "abc".into(),
            runs: 1,
            attempts: 100.0,
            successes: sr * 100.0,
            success_rate: Some(sr),
            energy_efficiency: Some(sr / 200.0),
            network_energy_efficiency: Some(sr / 200.0),
            tp_ratio: tp.iter().copied().collect(),
            per_arm: BTreeMap::new(),
            causes: BTreeMap::new(),
        }
    }

    #[test]
    fn aggregate_examples() {
        let runs: Vec<MetricsSummary> =
            [0.8, 0.7, 0.75, 0.8, 0.7].iter().map(|&s| summary_with(s, &[(-3, 1.0)])).collect();
        let agg = aggregate_runs(&runs).unwrap();
        assert!((agg.success_rate.unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(agg.runs, 5);

        let single = summary_with(0.6, &[(-3, 1.0)]);
        assert_eq!(aggregate_runs(std::slice::from_ref(&single)).unwrap(), single);

        let a = summary_with(0.5, &[(-3, 1.0)]);
        let b = summary_with(0.5, &[(-3, 0.5), (13, 0.5)]);
        let agg = aggregate_runs(&[a, b]).unwrap();
        assert_eq!(agg.tp_ratio, BTreeMap::from([(-3, 0.75), (13, 0.25)]));

        let mut other = summary_with(0.5, &[]);
        other.config_hash = "def".into();
        assert_eq!(aggregate_runs(&[summary_with(0.5, &[]), other]), Err(MetricsError::MixedConfigs));
        assert_eq!(aggregate_runs(&[]), Err(MetricsError::EmptyScope));
    }

    #[test]
    fn summary_per_arm_sums() {
        let mut log: Vec<RunRecord> = (0..8).map(|i| rec(0, 3, -3, i < 6, 200.0)).collect();
        log.extend((0..4).map(|i| rec(1, 1, 13, i < 1, 210.0)));
        let s = summarize(&log, "x", 2, "h");
        let n: f64 = s.per_arm.values().map(|a| a.selections).sum();
        let r: f64 = s.per_arm.values().map(|a| a.successes).sum();
        assert_eq!((n, r), (12.0, 7.0));
        assert_eq!(s.per_arm[&3].success_rate, Some(0.75));
        assert_eq!(s.per_arm[&3].energy_efficiency, Some(0.75 / 200.0));
        let sum: f64 = s.tp_ratio.values().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        // device 0: 6/1600, device 1: 1/840
        let expected = (6.0 / 1600.0 + 1.0 / 840.0) / 2.0;
        assert!((s.energy_efficiency.unwrap() - expected).abs() < 1e-15);
    }
}
