//! Per-device transmission parameter selection policies.
//!
//! Every policy picks an arm index into the shared [`ArmSpace`] before each
//! uplink and is told the outcome afterwards. Randomness comes only from the
//! device's own RNG stream, so a policy is a deterministic function of its
//! feedback history and seed.

mod adr_lite;
mod epsilon;
mod fixed;
mod ucb;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, PolicyError};
use crate::params::ArmSpace;

pub use adr_lite::{adr_lite_list, adr_lite_next, AdrLite};
pub use epsilon::{select_epsilon_greedy, EpsilonGreedy};
pub use fixed::{select_fixed, FixedAllocation};
pub use ucb::{select_ucb, tuned_score, tuned_variance, ucb_score, ucb_variance, UcbTuned};

pub type DeviceRng = rand_chacha::ChaCha8Rng;

/// Running statistics of one arm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ArmState {
    pub pulls: u64,
    pub reward_sum: f64,
    pub reward_sq_sum: f64,
    pub successes: u64,
}

impl ArmState {
    pub fn mean(&self) -> Option<f64> {
        (self.pulls > 0).then(|| self.reward_sum / self.pulls as f64)
    }

    /// Population variance of the observed rewards, clamped at zero.
    pub fn variance(&self) -> Option<f64> {
        let mean = self.mean()?;
        Some((self.reward_sq_sum / self.pulls as f64 - mean * mean).max(0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Initialization,
    Learned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyDecision {
    pub arm_index: usize,
    pub phase: Phase,
    /// Number of arms sharing the maximal score; 1 when there was no tie.
    pub tie_candidates: usize,
}

impl PolicyDecision {
    pub fn learned(arm_index: usize) -> Self {
        Self { arm_index, phase: Phase::Learned, tie_candidates: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feedback {
    pub arm_index: usize,
    pub acked: bool,
    pub reward: f64,
    pub e_toa: f64,
}

impl Feedback {
    /// A NACK always carries zero reward.
    pub fn new(arm_index: usize, acked: bool, reward: f64, e_toa: f64) -> Self {
        Self { arm_index, acked, reward: if acked { reward } else { 0.0 }, e_toa }
    }
}

/// Folds one observation into an arm's statistics.
pub fn update(arm: ArmState, fb: &Feedback) -> Result<ArmState, PolicyError> {
    if fb.reward < 0.0 || fb.reward.is_nan() {
        return Err(PolicyError::NegativeReward(fb.reward));
    }
    Ok(ArmState {
        pulls: arm.pulls + 1,
        reward_sum: arm.reward_sum + fb.reward,
        reward_sq_sum: arm.reward_sq_sum + fb.reward * fb.reward,
        successes: arm.successes + u64::from(fb.acked),
    })
}

/// Updates the addressed arm inside a slice.
pub(crate) fn update_in(arms: &mut [ArmState], fb: &Feedback) -> Result<(), PolicyError> {
    let len = arms.len();
    let slot = arms
        .get_mut(fb.arm_index)
        .ok_or(PolicyError::ArmOutOfRange { index: fb.arm_index, len })?;
    *slot = update(*slot, fb)?;
    Ok(())
}

/// What a policy learns from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardSignal {
    /// Energy-shaped reward on ACK, 0 otherwise.
    #[default]
    Energy,
    /// 1 on ACK, 0 otherwise.
    Ack,
}

pub trait SelectionPolicy: Send {
    fn select(&mut self, rng: &mut DeviceRng) -> PolicyDecision;

    fn observe(&mut self, fb: &Feedback) -> Result<(), PolicyError>;

    fn reward_signal(&self) -> RewardSignal {
        RewardSignal::Energy
    }

    /// Internal per-arm counters, for policies that keep them.
    fn arm_stats(&self) -> Option<&[ArmState]> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    ProposedUcbTuned,
    EpsilonGreedy,
    AdrLite,
    Fixed,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] =
        [PolicyKind::ProposedUcbTuned, PolicyKind::EpsilonGreedy, PolicyKind::AdrLite, PolicyKind::Fixed];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::ProposedUcbTuned => "proposed_ucb_tuned",
            PolicyKind::EpsilonGreedy => "epsilon_greedy",
            PolicyKind::AdrLite => "adr_lite",
            PolicyKind::Fixed => "fixed",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Stable tag mixed into per-device RNG seeds.
    pub fn seed_tag(self) -> u64 {
        match self {
            PolicyKind::ProposedUcbTuned => 1,
            PolicyKind::EpsilonGreedy => 2,
            PolicyKind::AdrLite => 3,
            PolicyKind::Fixed => 4,
        }
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicySettings {
    pub epsilon: f64,
    pub epsilon_reward: RewardSignal,
    /// Channel frequencies from worst to best, used to build the ADR-Lite list.
    pub adr_channel_order_hz: Vec<u64>,
}

pub fn build_policy(
    kind: PolicyKind,
    device_index: usize,
    space: &ArmSpace,
    settings: &PolicySettings,
) -> Result<Box<dyn SelectionPolicy>, ConfigError> {
    Ok(match kind {
        PolicyKind::ProposedUcbTuned => Box::new(UcbTuned::new(space.len())),
        PolicyKind::EpsilonGreedy => {
            Box::new(EpsilonGreedy::new(space.len(), settings.epsilon, settings.epsilon_reward)?)
        }
        PolicyKind::AdrLite => Box::new(AdrLite::new(space, &settings.adr_channel_order_hz)?),
        PolicyKind::Fixed => Box::new(FixedAllocation::new(device_index, space)?),
    })
}

/// Picks uniformly among `candidates` when there is more than one.
pub(crate) fn break_tie(candidates: &[usize], rng: &mut DeviceRng) -> usize {
    use rand::Rng;
    match candidates {
        [only] => *only,
        _ => candidates[rng.gen_range(0..candidates.len())],
    }
}
