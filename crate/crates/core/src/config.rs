//! Experiment configuration.
//!
//! A config is a single JSON object. Every field is optional and falls back
//! to the default experiment (5 selectable / 3 receivable channels, five power
//! levels, SF7 at 125 kHz, 200 uplinks every 10 s, 10 to 30 devices, 5 runs per
//! point). An empty file is the default config. Unknown fields are rejected.
//!
//! ```json
//! {
//!   "policies": ["proposed_ucb_tuned", "epsilon_greedy", "adr_lite", "fixed"],
//!   "device_counts": [10, 15, 20, 25, 30],
//!   "runs_per_point": 5,
//!   "transmissions": 200,
//!   "interval_s": 10.0,
//!   "selectable_channels_mhz": [920.6, 921.0, 921.4, 921.8, 922.2],
//!   "receivable_channels_mhz": [921.0, 921.4, 921.8],
//!   "tx_powers_dbm": [-3, 1, 5, 9, 13],
//!   "adr_channel_order_mhz": [920.6, 922.2, 921.0, 921.4, 921.8],
//!   "energy": {"e_wu_mj": 56.1, "e_proc_mj": 85.8, "e_r_mj": 66.0, "p_mcu_mw": 29.7,
//!              "p_toa_mw": {"-3": 20, "1": 25, "5": 35, "9": 55, "13": 90}},
//!   "radio": {"sf": 7, "bw_hz": 125000, "n_preamble": 8, "payload_base": 36, "payload_spread": 9},
//!   "epsilon": 0.1,
//!   "epsilon_reward": "energy",
//!   "cs_duration_s": 0.005,
//!   "reward_mode": "normalized",
//!   "base_seed": 1
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::energy::{EnergyModel, RadioConfig, RewardMode};
use crate::error::ConfigError;
use crate::netsim::{PayloadRule, SimConfig};
use crate::params::{
    hz_to_mhz, mhz_to_hz, ArmSpace, Channel, TxPower, DEFAULT_CHANNELS_HZ, DEFAULT_DRAW_MW,
    DEFAULT_POWER_LEVELS_DBM, DEFAULT_RECEIVABLE_HZ,
};
use crate::policy::{PolicyKind, PolicySettings, RewardSignal};

/// Worst-to-best channel ranking of the default plan: the two frequencies the
/// gateway cannot hear, then the receivable ones.
pub const DEFAULT_ADR_ORDER_HZ: [u64; 5] = [920_600_000, 922_200_000, 921_000_000, 921_400_000, 921_800_000];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySection {
    pub e_wu_mj: f64,
    pub e_proc_mj: f64,
    pub e_r_mj: f64,
    pub p_mcu_mw: f64,
    /// Radio draw per power level in dBm.
    pub p_toa_mw: BTreeMap<i32, f64>,
}

impl Default for EnergySection {
    fn default() -> Self {
        Self {
            e_wu_mj: 56.1,
            e_proc_mj: 85.8,
            e_r_mj: 66.0,
            p_mcu_mw: 29.7,
            p_toa_mw: DEFAULT_DRAW_MW.iter().copied().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioSection {
    pub sf: u32,
    pub bw_hz: f64,
    pub n_preamble: u32,
    /// Device `i` sends `payload_base + i % payload_spread` payload symbols.
    pub payload_base: u32,
    pub payload_spread: u32,
}

impl Default for RadioSection {
    fn default() -> Self {
        Self { sf: 7, bw_hz: 125_000.0, n_preamble: 8, payload_base: 36, payload_spread: 9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub policies: Vec<PolicyKind>,
    pub device_counts: Vec<usize>,
    pub runs_per_point: usize,
    #[serde(alias = "T")]
    pub transmissions: u32,
    pub interval_s: f64,
    pub selectable_channels_mhz: Vec<f64>,
    pub receivable_channels_mhz: Vec<f64>,
    pub tx_powers_dbm: Vec<i32>,
    /// Required for ADR-Lite when the channel plan is not the default one.
    pub adr_channel_order_mhz: Option<Vec<f64>>,
    pub energy: EnergySection,
    pub radio: RadioSection,
    pub epsilon: f64,
    pub epsilon_reward: RewardSignal,
    pub cs_duration_s: f64,
    pub reward_mode: RewardMode,
    pub base_seed: u64,
    /// Worker threads for sweeps. Does not affect results.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallel: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            policies: PolicyKind::ALL.to_vec(),
            device_counts: vec![10, 15, 20, 25, 30],
            runs_per_point: 5,
            transmissions: 200,
            interval_s: 10.0,
            selectable_channels_mhz: DEFAULT_CHANNELS_HZ.iter().map(|&hz| hz_to_mhz(hz)).collect(),
            receivable_channels_mhz: DEFAULT_RECEIVABLE_HZ.iter().map(|&hz| hz_to_mhz(hz)).collect(),
            tx_powers_dbm: DEFAULT_POWER_LEVELS_DBM.to_vec(),
            adr_channel_order_mhz: None,
            energy: EnergySection::default(),
            radio: RadioSection::default(),
            epsilon: 0.1,
            epsilon_reward: RewardSignal::Energy,
            cs_duration_s: 0.005,
            reward_mode: RewardMode::Normalized,
            base_seed: 1,
            parallel: None,
        }
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg = if text.trim().is_empty() {
        ExperimentConfig::default()
    } else {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

impl ExperimentConfig {
    pub fn channels(&self) -> Result<Vec<Channel>, ConfigError> {
        let receivable: BTreeSet<u64> = self.receivable_channels_mhz.iter().map(|&m| mhz_to_hz(m)).collect();
        let selectable: Vec<u64> = self.selectable_channels_mhz.iter().map(|&m| mhz_to_hz(m)).collect();
        if let Some(missing) = receivable.iter().find(|hz| !selectable.contains(hz)) {
            return Err(ConfigError::UnknownReceivableChannel(*missing));
        }
        Ok(selectable.into_iter().map(|hz| Channel::new(hz, receivable.contains(&hz))).collect())
    }

    pub fn powers(&self) -> Result<Vec<TxPower>, ConfigError> {
        self.tx_powers_dbm
            .iter()
            .map(|&level| {
                let draw = self.energy.p_toa_mw.get(&level).ok_or(ConfigError::MissingPowerDraw(level))?;
                Ok(TxPower::new(level, *draw))
            })
            .collect()
    }

    pub fn arm_space(&self) -> Result<ArmSpace, ConfigError> {
        ArmSpace::new(&self.channels()?, &self.powers()?)
    }

    pub fn energy_model(&self) -> EnergyModel {
        EnergyModel {
            e_wu: self.energy.e_wu_mj,
            e_proc: self.energy.e_proc_mj,
            e_r: self.energy.e_r_mj,
            p_mcu: self.energy.p_mcu_mw,
            p_toa_by_level: self.energy.p_toa_mw.clone(),
        }
    }

    fn adr_order_hz(&self) -> Result<Vec<u64>, ConfigError> {
        match &self.adr_channel_order_mhz {
            Some(order) => Ok(order.iter().map(|&m| mhz_to_hz(m)).collect()),
            None => {
                let mut plan: Vec<u64> = self.selectable_channels_mhz.iter().map(|&m| mhz_to_hz(m)).collect();
                plan.sort_unstable();
                let receivable: BTreeSet<u64> =
                    self.receivable_channels_mhz.iter().map(|&m| mhz_to_hz(m)).collect();
                if plan == DEFAULT_CHANNELS_HZ && receivable == DEFAULT_RECEIVABLE_HZ.into_iter().collect() {
                    Ok(DEFAULT_ADR_ORDER_HZ.to_vec())
                } else if self.policies.contains(&PolicyKind::AdrLite) {
                    Err(ConfigError::Invalid(
                        "adr_lite with a non-default channel plan needs adr_channel_order_mhz".into(),
                    ))
                } else {
                    Ok(plan)
                }
            }
        }
    }

    /// Builds the per-run simulation config for one sweep point.
    pub fn sim_config(&self, policy: PolicyKind, devices: usize) -> Result<SimConfig, ConfigError> {
        Ok(SimConfig {
            policy,
            devices,
            transmissions: self.transmissions,
            interval_s: self.interval_s,
            cs_duration_s: self.cs_duration_s,
            space: self.arm_space()?,
            energy: self.energy_model(),
            radio: RadioConfig {
                sf: self.radio.sf,
                bw_hz: self.radio.bw_hz,
                n_preamble: self.radio.n_preamble,
                n_payload: self.radio.payload_base,
            },
            payload: PayloadRule { base: self.radio.payload_base, spread: self.radio.payload_spread },
            reward_mode: self.reward_mode,
            policy_settings: PolicySettings {
                epsilon: self.epsilon,
                epsilon_reward: self.epsilon_reward,
                adr_channel_order_hz: self.adr_order_hz()?,
            },
            start_offsets_s: None,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.policies.is_empty() {
            return Err(ConfigError::Invalid("policies must not be empty".into()));
        }
        let unique: BTreeSet<_> = self.policies.iter().collect();
        if unique.len() != self.policies.len() {
            return Err(ConfigError::Invalid("policies must not repeat".into()));
        }
        if self.device_counts.is_empty() || self.device_counts.contains(&0) {
            return Err(ConfigError::Invalid("device_counts must be non-empty and positive".into()));
        }
        let unique: BTreeSet<_> = self.device_counts.iter().collect();
        if unique.len() != self.device_counts.len() {
            return Err(ConfigError::Invalid("device_counts must not repeat".into()));
        }
        if self.runs_per_point == 0 {
            return Err(ConfigError::Invalid("runs_per_point must be at least 1".into()));
        }
        if self.radio.payload_spread == 0 {
            return Err(ConfigError::Invalid("radio.payload_spread must be at least 1".into()));
        }
        if self.parallel == Some(0) {
            return Err(ConfigError::Invalid("parallel must be at least 1".into()));
        }
        if self.receivable_channels_mhz.is_empty() && self.policies.contains(&PolicyKind::Fixed) {
            return Err(ConfigError::Invalid("fixed allocation needs a receivable channel".into()));
        }
        let max_devices = *self.device_counts.iter().max().expect("non-empty");
        for &policy in &self.policies {
            let sim = self.sim_config(policy, max_devices)?;
            sim.validate()?;
            // surfaces policy construction errors (epsilon range, ADR order)
            crate::policy::build_policy(policy, 0, &sim.space, &sim.policy_settings)?;
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form, excluding `parallel`.
    pub fn config_hash(&self) -> String {
        let canonical = ExperimentConfig { parallel: None, ..self.clone() };
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(parse_config("{}").unwrap(), ExperimentConfig::default());
        assert_eq!(cfg.transmissions, 200);
        assert_eq!(cfg.interval_s, 10.0);
        assert_eq!(cfg.device_counts, vec![10, 15, 20, 25, 30]);
        assert_eq!(cfg.arm_space().unwrap().len(), 25);
        assert_eq!(cfg.radio.sf, 7);
        assert_eq!(cfg.energy.e_wu_mj, 56.1);
        assert_eq!(cfg.energy.p_mcu_mw, 29.7);
    }

    #[test]
    fn missing_power_level_is_named() {
        let text = r#"{"energy": {"p_toa_mw": {"-3": 20, "1": 25, "5": 35, "9": 55}}}"#;
        let err = parse_config(text).unwrap_err();
        assert!(matches!(err, ConfigError::MissingPowerDraw(13)), "{err}");
        assert!(err.to_string().contains("13 dBm"));
    }

    #[test]
    fn single_sweep_point_override() {
        let cfg = parse_config(r#"{"device_counts": [10], "T": 50}"#).unwrap();
        assert_eq!(cfg.device_counts, vec![10]);
        assert_eq!(cfg.transmissions, 50);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_config("{\n  \"epsilon\": ,\n}").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
        assert!(matches!(parse_config(r#"{"bogus": 1}"#), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn cross_field_checks() {
        let err = parse_config(r#"{"receivable_channels_mhz": [923.0]}"#).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownReceivableChannel(923_000_000)));

        let err = parse_config(r#"{"selectable_channels_mhz": [921.0, 921.4], "receivable_channels_mhz": [921.0]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("adr_channel_order_mhz"));

        let ok = parse_config(
            r#"{"selectable_channels_mhz": [921.0, 921.4], "receivable_channels_mhz": [921.0],
                "adr_channel_order_mhz": [921.4, 921.0]}"#,
        );
        assert!(ok.is_ok());

        assert!(parse_config(r#"{"epsilon": 2.0}"#).is_err());
        assert!(parse_config(r#"{"interval_s": 0.01}"#).is_err());
        assert!(parse_config(r#"{"device_counts": []}"#).is_err());
    }

    #[test]
    fn hash_ignores_parallelism_only() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig { parallel: Some(8), ..a.clone() };
        let c = ExperimentConfig { base_seed: 2, ..a.clone() };
        assert_eq!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), c.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }
}
