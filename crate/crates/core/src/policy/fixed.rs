use crate::error::{ConfigError, PolicyError};
use crate::params::{ArmSpace, Channel};

use super::{DeviceRng, Feedback, PolicyDecision, SelectionPolicy};

/// Round-robin channel assignment over the receivable channels at the lowest
/// power. `receivable_channels` is expected sorted by frequency.
pub fn select_fixed(
    device_index: usize,
    receivable_channels: &[Channel],
    space: &ArmSpace,
) -> Result<PolicyDecision, ConfigError> {
    if receivable_channels.is_empty() {
        return Err(ConfigError::Invalid("fixed allocation needs at least one receivable channel".into()));
    }
    let channel = receivable_channels[device_index % receivable_channels.len()];
    let combo = space
        .find(channel.center_frequency_hz, space.min_power().level_dbm)
        .ok_or_else(|| ConfigError::Invalid(format!("channel {channel} is not selectable")))?;
    Ok(PolicyDecision::learned(combo.arm_index))
}

#[derive(Debug, Clone)]
pub struct FixedAllocation {
    decision: PolicyDecision,
}

impl FixedAllocation {
    pub fn new(device_index: usize, space: &ArmSpace) -> Result<Self, ConfigError> {
        Ok(Self { decision: select_fixed(device_index, &space.receivable_channels(), space)? })
    }
}

impl SelectionPolicy for FixedAllocation {
    fn select(&mut self, _rng: &mut DeviceRng) -> PolicyDecision {
        self.decision
    }

    fn observe(&mut self, _fb: &Feedback) -> Result<(), PolicyError> {
        Ok(())
    }
}
