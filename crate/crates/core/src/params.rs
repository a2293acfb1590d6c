//! Channels, transmit power levels and the (channel, power) arm space.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Selectable center frequencies of the default plan, in Hz.
pub const DEFAULT_CHANNELS_HZ: [u64; 5] =
    [920_600_000, 921_000_000, 921_400_000, 921_800_000, 922_200_000];

/// Frequencies the gateway listens on under the default plan, in Hz.
pub const DEFAULT_RECEIVABLE_HZ: [u64; 3] = [921_000_000, 921_400_000, 921_800_000];

/// Selectable transmit power levels of the default plan, in dBm.
pub const DEFAULT_POWER_LEVELS_DBM: [i32; 5] = [-3, 1, 5, 9, 13];

/// Placeholder radio draw per power level (mW). Not taken from any datasheet;
/// override it in the config for real hardware.
pub const DEFAULT_DRAW_MW: [(i32, f64); 5] =
    [(-3, 20.0), (1, 25.0), (5, 35.0), (9, 55.0), (13, 90.0)];

/// Converts a frequency given in MHz to integer Hz.
pub fn mhz_to_hz(mhz: f64) -> u64 {
    (mhz * 1e6).round() as u64
}

pub fn hz_to_mhz(hz: u64) -> f64 {
    hz as f64 / 1e6
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Channel {
    pub center_frequency_hz: u64,
    /// True iff the gateway has a receiver on this frequency.
    pub receivable: bool,
}

impl Channel {
    pub fn new(center_frequency_hz: u64, receivable: bool) -> Self {
        Self { center_frequency_hz, receivable }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1} MHz", hz_to_mhz(self.center_frequency_hz))
    }
}

/// A transmit power level together with the radio draw it induces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TxPower {
    pub level_dbm: i32,
    pub draw_mw: f64,
}

impl TxPower {
    pub fn new(level_dbm: i32, draw_mw: f64) -> Self {
        Self { level_dbm, draw_mw }
    }
}

/// One bandit arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamCombo {
    pub channel: Channel,
    pub power: TxPower,
    pub arm_index: usize,
}

/// The Cartesian product of channels and powers, channel-major with powers
/// ascending inside each channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSpace {
    channels: Vec<Channel>,
    powers: Vec<TxPower>,
    combos: Vec<ParamCombo>,
}

impl ArmSpace {
    pub fn new(channels: &[Channel], powers: &[TxPower]) -> Result<Self, ConfigError> {
        let combos = build_arm_space(channels, powers)?;
        let mut powers = powers.to_vec();
        powers.sort_by_key(|p| p.level_dbm);
        Ok(Self { channels: channels.to_vec(), powers, combos })
    }

    pub fn len(&self) -> usize {
        self.combos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combos.is_empty()
    }

    pub fn combos(&self) -> &[ParamCombo] {
        &self.combos
    }

    pub fn get(&self, arm_index: usize) -> Option<&ParamCombo> {
        self.combos.get(arm_index)
    }

    pub fn find(&self, frequency_hz: u64, level_dbm: i32) -> Option<&ParamCombo> {
        self.combos.iter().find(|c| {
            c.channel.center_frequency_hz == frequency_hz && c.power.level_dbm == level_dbm
        })
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Powers sorted by ascending level.
    pub fn powers(&self) -> &[TxPower] {
        &self.powers
    }

    pub fn min_power(&self) -> TxPower {
        self.powers[0]
    }

    /// Receivable channels sorted by frequency.
    pub fn receivable_channels(&self) -> Vec<Channel> {
        let mut out: Vec<Channel> = self.channels.iter().copied().filter(|c| c.receivable).collect();
        out.sort_by_key(|c| c.center_frequency_hz);
        out
    }
}

/// Enumerates every (channel, power) pair. Channels keep their given order;
/// powers are visited by ascending level. `arm_index` follows that order.
pub fn build_arm_space(
    channels: &[Channel],
    powers: &[TxPower],
) -> Result<Vec<ParamCombo>, ConfigError> {
    if channels.is_empty() {
        return Err(ConfigError::Invalid("channel list is empty".into()));
    }
    if powers.is_empty() {
        return Err(ConfigError::Invalid("power list is empty".into()));
    }
    let mut seen = HashSet::new();
    for c in channels {
        if !seen.insert(c.center_frequency_hz) {
            return Err(ConfigError::DuplicateFrequency(c.center_frequency_hz));
        }
    }
    let mut seen = HashSet::new();
    for p in powers {
        if !seen.insert(p.level_dbm) {
            return Err(ConfigError::DuplicatePowerLevel(p.level_dbm));
        }
    }
    let mut sorted_powers = powers.to_vec();
    sorted_powers.sort_by_key(|p| p.level_dbm);

    let mut combos = Vec::with_capacity(channels.len() * powers.len());
    for channel in channels {
        for power in &sorted_powers {
            combos.push(ParamCombo { channel: *channel, power: *power, arm_index: combos.len() });
        }
    }
    Ok(combos)
}

/// The default five-channel plan with three receivable frequencies.
pub fn default_channels() -> Vec<Channel> {
    DEFAULT_CHANNELS_HZ
        .iter()
        .map(|&hz| Channel::new(hz, DEFAULT_RECEIVABLE_HZ.contains(&hz)))
        .collect()
}

pub fn default_powers() -> Vec<TxPower> {
    DEFAULT_DRAW_MW.iter().map(|&(level, draw)| TxPower::new(level, draw)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_grid_has_25_arms() {
        let arms = build_arm_space(&default_channels(), &default_powers()).unwrap();
        assert_eq!(arms.len(), 25);
        assert_eq!(default_channels().iter().filter(|c| c.receivable).count(), 3);
    }

    #[test]
    fn singleton_product() {
        let arms =
            build_arm_space(&[Channel::new(921_000_000, true)], &[TxPower::new(5, 30.0)]).unwrap();
        assert_eq!(arms.len(), 1);
        assert_eq!(arms[0].arm_index, 0);
    }

    #[test]
    fn two_by_three_order() {
        let channels = [Channel::new(921_000_000, true), Channel::new(921_400_000, true)];
        // deliberately unsorted
        let powers = [TxPower::new(5, 35.0), TxPower::new(-3, 20.0), TxPower::new(1, 25.0)];
        let arms = build_arm_space(&channels, &powers).unwrap();
        assert_eq!(arms.len(), 6);
        for (i, a) in arms.iter().enumerate() {
            assert_eq!(a.arm_index, i);
        }
        assert_eq!(arms[3].channel, channels[1]);
        assert_eq!(arms[3].power.level_dbm, -3);
        assert_eq!(arms[5].power.level_dbm, 5);
    }

    #[test]
    fn duplicates_rejected() {
        let c = Channel::new(921_000_000, true);
        let p = TxPower::new(1, 25.0);
        assert!(matches!(
            build_arm_space(&[c, c], &[p]),
            Err(ConfigError::DuplicateFrequency(921_000_000))
        ));
        assert!(matches!(
            build_arm_space(&[c], &[p, TxPower::new(1, 30.0)]),
            Err(ConfigError::DuplicatePowerLevel(1))
        ));
        assert!(build_arm_space(&[], &[p]).is_err());
        assert!(build_arm_space(&[c], &[]).is_err());
    }

    #[test]
    fn mhz_conversion_is_exact_for_plan() {
        assert_eq!(mhz_to_hz(920.6), 920_600_000);
        assert_eq!(mhz_to_hz(921.8), 921_800_000);
        assert_eq!(hz_to_mhz(921_400_000), 921.4);
    }

    proptest! {
        #[test]
        fn size_and_lookup_round_trip(n_ch in 1usize..8, n_pw in 1usize..8) {
            let channels: Vec<Channel> = (0..n_ch)
                .map(|i| Channel::new(920_000_000 + 200_000 * i as u64, i % 2 == 0))
                .collect();
            let powers: Vec<TxPower> = (0..n_pw)
                .map(|i| TxPower::new(-3 + 4 * i as i32, 20.0 + i as f64))
                .rev()
                .collect();
            let space = ArmSpace::new(&channels, &powers).unwrap();
            prop_assert_eq!(space.len(), n_ch * n_pw);
            for combo in space.combos() {
                let back = space.get(combo.arm_index).unwrap();
                prop_assert_eq!(back.channel.center_frequency_hz, combo.channel.center_frequency_hz);
                prop_assert_eq!(back.power.level_dbm, combo.power.level_dbm);
                let found = space
                    .find(combo.channel.center_frequency_hz, combo.power.level_dbm)
                    .unwrap();
                prop_assert_eq!(found.arm_index, combo.arm_index);
            }
        }
    }
}
