//! Device-side ADR-Lite: a binary search over a list of (channel, power)
//! pairs sorted from cheapest/worst to most expensive/most robust, driven only
//! by the outcome of the previous attempt.

use crate::error::{ConfigError, PolicyError};
use crate::params::{ArmSpace, ParamCombo};

use super::{DeviceRng, Feedback, PolicyDecision, SelectionPolicy};

/// Builds the search list: powers ascending, and within each power the
/// channels in `channel_order_hz` (worst first).
pub fn adr_lite_list(space: &ArmSpace, channel_order_hz: &[u64]) -> Result<Vec<ParamCombo>, ConfigError> {
    let mut order = channel_order_hz.to_vec();
    order.sort_unstable();
    let mut selectable: Vec<u64> = space.channels().iter().map(|c| c.center_frequency_hz).collect();
    selectable.sort_unstable();
    if order != selectable {
        return Err(ConfigError::Invalid(
            "adr_channel_order_mhz must list every selectable channel exactly once".into(),
        ));
    }
    let mut list = Vec::with_capacity(space.len());
    for power in space.powers() {
        for &hz in channel_order_hz {
            let combo = space.find(hz, power.level_dbm).expect("validated above");
            list.push(*combo);
        }
    }
    Ok(list)
}

/// Next list position: on success halve toward the head, on failure move
/// halfway toward the tail. Floors on success and ceils on failure.
pub fn adr_lite_next(prev_index: usize, acked: bool, list_len: usize) -> usize {
    debug_assert!(prev_index < list_len);
    if acked {
        prev_index / 2
    } else {
        (list_len - 1 + prev_index).div_ceil(2)
    }
}

#[derive(Debug, Clone)]
pub struct AdrLite {
    list: Vec<usize>,
    position: usize,
}

impl AdrLite {
    pub fn new(space: &ArmSpace, channel_order_hz: &[u64]) -> Result<Self, ConfigError> {
        let list: Vec<usize> = adr_lite_list(space, channel_order_hz)?.iter().map(|c| c.arm_index).collect();
        let position = list.len() - 1;
        Ok(Self { list, position })
    }

    pub fn position(&self) -> usize {
        self.position
    }
}

impl SelectionPolicy for AdrLite {
    fn select(&mut self, _rng: &mut DeviceRng) -> PolicyDecision {
        PolicyDecision::learned(self.list[self.position])
    }

    fn observe(&mut self, fb: &Feedback) -> Result<(), PolicyError> {
        self.position = adr_lite_next(self.position, fb.acked, self.list.len());
        Ok(())
    }
}
