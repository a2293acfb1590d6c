#![allow(dead_code)]

use lora_txsel::config::ExperimentConfig;
use lora_txsel::netsim::SimConfig;
use lora_txsel::policy::PolicyKind;

pub fn sim(policy: PolicyKind, devices: usize) -> SimConfig {
    ExperimentConfig::default().sim_config(policy, devices).expect("default config is valid")
}

pub fn sim_with(policy: PolicyKind, devices: usize, transmissions: u32) -> SimConfig {
    let cfg = ExperimentConfig { transmissions, ..Default::default() };
    cfg.sim_config(policy, devices).expect("valid config")
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}
