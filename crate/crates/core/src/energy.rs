//! Airtime and active-mode energy of a single uplink attempt.
//!
//! Units: seconds, milliwatts and millijoules (mW * s = mJ). The fixed
//! wake-up, processing and receive contributions are per-attempt energies.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::params::TxPower;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    pub sf: u32,
    pub bw_hz: f64,
    /// Preamble symbol count.
    pub n_preamble: u32,
    /// Payload symbol count.
    pub n_payload: u32,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self { sf: 7, bw_hz: 125_000.0, n_preamble: 8, n_payload: 36 }
    }
}

impl RadioConfig {
    pub fn with_payload(self, n_payload: u32) -> Self {
        Self { n_payload, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    /// Wake-up energy, mJ.
    pub e_wu: f64,
    /// Parameter-selection processing energy, mJ.
    pub e_proc: f64,
    /// Receive-window energy, mJ.
    pub e_r: f64,
    /// Microcontroller draw while transmitting, mW.
    pub p_mcu: f64,
    /// Radio draw per power level, mW.
    pub p_toa_by_level: BTreeMap<i32, f64>,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            e_wu: 56.1,
            e_proc: 85.8,
            e_r: 66.0,
            p_mcu: 29.7,
            p_toa_by_level: crate::params::DEFAULT_DRAW_MW.iter().copied().collect(),
        }
    }
}

impl EnergyModel {
    pub fn validate(&self, powers: &[TxPower]) -> Result<(), ConfigError> {
        for (name, v) in [("e_wu", self.e_wu), ("e_proc", self.e_proc), ("e_r", self.e_r), ("p_mcu", self.p_mcu)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Invalid(format!("energy.{name} must be > 0, got {v}")));
            }
        }
        for (level, draw) in &self.p_toa_by_level {
            if !(draw.is_finite() && *draw > 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "energy.p_toa_mw[{level}] must be > 0, got {draw}"
                )));
            }
        }
        for p in powers {
            if !self.p_toa_by_level.contains_key(&p.level_dbm) {
                return Err(ConfigError::MissingPowerDraw(p.level_dbm));
            }
        }
        let mut levels: Vec<i32> = powers.iter().map(|p| p.level_dbm).collect();
        levels.sort_unstable();
        for pair in levels.windows(2) {
            if self.p_toa_by_level[&pair[0]] >= self.p_toa_by_level[&pair[1]] {
                return Err(ConfigError::Invalid(format!(
                    "radio draw must increase with power level ({} dBm >= {} dBm)",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(())
    }

    /// Fixed per-attempt overhead charged whether or not the radio transmits.
    pub fn overhead(&self) -> f64 {
        self.e_wu + self.e_proc + self.e_r
    }

    pub fn draw_mw(&self, level_dbm: i32) -> Result<f64, ConfigError> {
        self.p_toa_by_level.get(&level_dbm).copied().ok_or(ConfigError::MissingPowerDraw(level_dbm))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AirTime {
    pub t_preamble: f64,
    pub t_payload: f64,
    pub t_toa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttemptEnergy {
    pub t_symbol: f64,
    pub t_preamble: f64,
    pub t_payload: f64,
    pub t_toa: f64,
    pub e_toa: f64,
    pub e_active: f64,
}

/// How an ACKed attempt is turned into a bandit reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// `e_toa_min / e_toa`, in (0, 1].
    #[default]
    Normalized,
    /// `1 / e_toa`, per mJ.
    Raw,
}

pub fn symbol_time(cfg: &RadioConfig) -> f64 {
    2f64.powi(cfg.sf as i32) / cfg.bw_hz
}

pub fn time_on_air(cfg: &RadioConfig) -> AirTime {
    let t_symbol = symbol_time(cfg);
    let t_preamble = (4.25 + cfg.n_preamble as f64) * t_symbol;
    let t_payload = t_symbol * cfg.n_payload as f64;
    AirTime { t_preamble, t_payload, t_toa: t_preamble + t_payload }
}

pub fn attempt_energy(
    cfg: &RadioConfig,
    model: &EnergyModel,
    power: TxPower,
) -> Result<AttemptEnergy, ConfigError> {
    let p_toa = model.draw_mw(power.level_dbm)?;
    let air = time_on_air(cfg);
    let e_toa = (model.p_mcu + p_toa) * air.t_toa;
    Ok(AttemptEnergy {
        t_symbol: symbol_time(cfg),
        t_preamble: air.t_preamble,
        t_payload: air.t_payload,
        t_toa: air.t_toa,
        e_toa,
        e_active: model.e_wu + model.e_proc + e_toa + model.e_r,
    })
}

/// Reward for an ACKed attempt. `e_toa_min` is the transmit energy at the
/// lowest configured power for the same payload (ignored in raw mode).
pub fn reward_basis(e: &AttemptEnergy, e_toa_min: f64, mode: RewardMode) -> f64 {
    match mode {
        RewardMode::Normalized => e_toa_min / e.e_toa,
        RewardMode::Raw => 1.0 / e.e_toa,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn symbol_times() {
        assert!(rel(symbol_time(&RadioConfig::default()), 1.024e-3) < 1e-12);
        let wide = RadioConfig { bw_hz: 250_000.0, ..Default::default() };
        assert!(rel(symbol_time(&wide), 0.512e-3) < 1e-12);
        let unit = RadioConfig { sf: 0, bw_hz: 1.0, ..Default::default() };
        assert_eq!(symbol_time(&unit), 1.0);
    }

    #[test]
    fn airtime_examples() {
        let a = time_on_air(&RadioConfig::default());
        assert!(rel(a.t_preamble, 12.544e-3) < 1e-12);
        assert!(rel(a.t_payload, 36.864e-3) < 1e-12);
        assert!(rel(a.t_toa, 49.408e-3) < 1e-12);

        let empty = time_on_air(&RadioConfig::default().with_payload(0));
        assert_eq!(empty.t_toa, empty.t_preamble);

        let long = time_on_air(&RadioConfig::default().with_payload(44));
        assert!(rel(long.t_payload, 45.056e-3) < 1e-12);
        assert!(rel(long.t_toa, 57.600e-3) < 1e-12);
    }

    #[test]
    fn energy_examples() {
        let mut model = EnergyModel::default();
        model.p_toa_by_level.insert(5, 100.0);
        let e = attempt_energy(&RadioConfig::default(), &model, TxPower::new(5, 100.0)).unwrap();
        // 129.7 mW * 49.408 ms
        assert!(rel(e.e_toa, 6.4082176) < 1e-12);
        assert!(rel(e.e_active, 214.3082176) < 1e-12);
        assert_eq!(e.t_toa, e.t_preamble + e.t_payload);
        assert!(e.e_active >= e.e_toa);

        model.p_toa_by_level.insert(9, 100.0);
        let same = attempt_energy(&RadioConfig::default(), &model, TxPower::new(9, 100.0)).unwrap();
        assert_eq!(same.e_toa, e.e_toa);
    }

    #[test]
    fn missing_level_is_config_error() {
        let err = attempt_energy(&RadioConfig::default(), &EnergyModel::default(), TxPower::new(20, 1.0));
        assert!(matches!(err, Err(ConfigError::MissingPowerDraw(20))));
    }

    #[test]
    fn reward_modes() {
        let e = AttemptEnergy { t_symbol: 0.0, t_preamble: 0.0, t_payload: 0.0, t_toa: 0.0, e_toa: 6.408, e_active: 0.0 };
        assert_eq!(reward_basis(&e, 6.408, RewardMode::Normalized), 1.0);
        assert_eq!(reward_basis(&e, 3.204, RewardMode::Normalized), 0.5);
        assert!((reward_basis(&e, 0.0, RewardMode::Raw) - 0.15606).abs() < 1e-5);
    }

    #[test]
    fn validation() {
        let powers = crate::params::default_powers();
        assert!(EnergyModel::default().validate(&powers).is_ok());
        let mut m = EnergyModel::default();
        m.p_toa_by_level.remove(&13);
        assert!(matches!(m.validate(&powers), Err(ConfigError::MissingPowerDraw(13))));
        let m = EnergyModel { e_r: 0.0, ..Default::default() };
        assert!(m.validate(&powers).is_err());
        let mut m = EnergyModel::default();
        m.p_toa_by_level.insert(9, 10.0);
        assert!(m.validate(&powers).is_err());
    }
}
