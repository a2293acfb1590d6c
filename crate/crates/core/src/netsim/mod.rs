//! Event-driven simulation of N end devices uplinking to a gateway with one
//! receiver per receivable channel.
//!
//! Per attempt a device wakes, asks its policy for an arm, listens on the
//! chosen channel for the carrier-sense window and then either gives up
//! (channel busy) or transmits. Any two transmissions overlapping in time on
//! the same frequency are both lost. Successful uplinks are ACKed instantly
//! at the end of their airtime, and every outcome is fed back to the policy
//! before the device's next wake-up.

mod occupancy;
mod queue;

use rand::{Rng, SeedableRng};

use crate::energy::{attempt_energy, reward_basis, AttemptEnergy, EnergyModel, RadioConfig, RewardMode};
use crate::error::ConfigError;
use crate::metrics::RunRecord;
use crate::params::ArmSpace;
use crate::policy::{build_policy, ArmState, DeviceRng, Feedback, PolicyDecision, PolicyKind, PolicySettings, RewardSignal, SelectionPolicy};
use crate::seed::{mix_seed, OFFSET_STREAM, POLICY_STREAM};

pub use occupancy::{carrier_sense, intervals_overlap, resolve_reception, Cause, ChannelOccupancy, Transmission};
pub use queue::{to_micros, to_seconds, EventKind, EventQueue, Micros, SimEvent};

/// Payload symbol count per device: `base + device_index % spread`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PayloadRule {
    pub base: u32,
    pub spread: u32,
}

impl Default for PayloadRule {
    fn default() -> Self {
        Self { base: 36, spread: 9 }
    }
}

impl PayloadRule {
    pub fn for_device(&self, device_index: usize) -> u32 {
        self.base + (device_index % self.spread.max(1) as usize) as u32
    }

    pub fn max(&self) -> u32 {
        self.base + self.spread.max(1) - 1
    }
}

/// Everything one simulation run needs.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub policy: PolicyKind,
    pub devices: usize,
    pub transmissions: u32,
    pub interval_s: f64,
    pub cs_duration_s: f64,
    pub space: ArmSpace,
    pub energy: EnergyModel,
    /// SF, bandwidth and preamble length; the payload comes from `payload`.
    pub radio: RadioConfig,
    pub payload: PayloadRule,
    pub reward_mode: RewardMode,
    pub policy_settings: PolicySettings,
    /// Fixed start offsets in seconds, one per device. Drawn uniformly from
    /// `[0, interval)` when absent.
    pub start_offsets_s: Option<Vec<f64>>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.devices == 0 {
            return Err(ConfigError::Invalid("device count must be at least 1".into()));
        }
        if self.transmissions == 0 {
            return Err(ConfigError::Invalid("transmissions must be at least 1".into()));
        }
        if !(self.interval_s.is_finite() && self.interval_s > 0.0) {
            return Err(ConfigError::Invalid(format!("interval_s must be > 0, got {}", self.interval_s)));
        }
        if !(self.cs_duration_s.is_finite() && self.cs_duration_s >= 0.0) {
            return Err(ConfigError::Invalid(format!("cs_duration_s must be >= 0, got {}", self.cs_duration_s)));
        }
        if !(self.radio.bw_hz.is_finite() && self.radio.bw_hz > 0.0) {
            return Err(ConfigError::Invalid("radio.bw_hz must be > 0".into()));
        }
        self.energy.validate(self.space.powers())?;
        let longest = crate::energy::time_on_air(&self.radio.with_payload(self.payload.max())).t_toa;
        if to_micros(self.cs_duration_s) + to_micros(longest) >= to_micros(self.interval_s) {
            return Err(ConfigError::Invalid(
                "interval_s must exceed carrier sense plus the longest airtime".into(),
            ));
        }
        if let Some(offsets) = &self.start_offsets_s {
            if offsets.len() != self.devices {
                return Err(ConfigError::Invalid(format!(
                    "{} start offsets given for {} devices",
                    offsets.len(),
                    self.devices
                )));
            }
            if offsets.iter().any(|o| !(o.is_finite() && *o >= 0.0)) {
                return Err(ConfigError::Invalid("start offsets must be finite and >= 0".into()));
            }
        }
        Ok(())
    }
}

/// Wake-up times `offset + i * interval` for `i` in `0..count`.
pub fn schedule_attempts(start_offset: Micros, interval: Micros, count: u32) -> Vec<Micros> {
    (0..count as u64).map(|i| start_offset + i * interval).collect()
}

#[derive(Debug, Clone, Copy)]
struct PendingAttempt {
    attempt: u32,
    decision: PolicyDecision,
    wake: Micros,
    tx_id: Option<u64>,
    cause: Option<Cause>,
}

pub struct DeviceState {
    pub device_index: usize,
    pub start_offset: Micros,
    pub attempts_done: u32,
    pub n_payload: u32,
    pub rng_seed: u64,
    policy: Box<dyn SelectionPolicy>,
    rng: DeviceRng,
    /// Energy per arm for this device's payload.
    energies: Vec<AttemptEnergy>,
    e_toa_min: f64,
    pending: Option<PendingAttempt>,
}

impl DeviceState {
    pub fn arm_stats(&self) -> Option<&[ArmState]> {
        self.policy.arm_stats()
    }
}

pub struct SimOutput {
    pub records: Vec<RunRecord>,
    /// Final per-arm counters of each device's policy, when it keeps any.
    pub arm_stats: Vec<Option<Vec<ArmState>>>,
}

pub struct Simulator {
    cfg: SimConfig,
    seed: u64,
    interval: Micros,
    cs: Micros,
    now: Micros,
    queue: EventQueue,
    occupancy: ChannelOccupancy,
    devices: Vec<DeviceState>,
    records: Vec<RunRecord>,
    next_tx_id: u64,
}

impl Simulator {
    pub fn new(cfg: SimConfig, seed: u64) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let interval = to_micros(cfg.interval_s);
        let cs = to_micros(cfg.cs_duration_s);
        let min_power = cfg.space.min_power();

        let mut devices = Vec::with_capacity(cfg.devices);
        let mut queue = EventQueue::new();
        for idx in 0..cfg.devices {
            let start_offset = match &cfg.start_offsets_s {
                Some(offsets) => to_micros(offsets[idx]),
                None => {
                    let mut r = DeviceRng::seed_from_u64(mix_seed(seed, &[OFFSET_STREAM, idx as u64]));
                    r.gen_range(0..interval)
                }
            };
            let n_payload = cfg.payload.for_device(idx);
            let radio = cfg.radio.with_payload(n_payload);
            let energies = cfg
                .space
                .combos()
                .iter()
                .map(|c| attempt_energy(&radio, &cfg.energy, c.power))
                .collect::<Result<Vec<_>, _>>()?;
            let e_toa_min = attempt_energy(&radio, &cfg.energy, min_power)?.e_toa;
            let rng_seed = mix_seed(seed, &[POLICY_STREAM, cfg.policy.seed_tag(), idx as u64]);
            devices.push(DeviceState {
                device_index: idx,
                start_offset,
                attempts_done: 0,
                n_payload,
                rng_seed,
                policy: build_policy(cfg.policy, idx, &cfg.space, &cfg.policy_settings)?,
                rng: DeviceRng::seed_from_u64(rng_seed),
                energies,
                e_toa_min,
                pending: None,
            });
            queue.push(start_offset, EventKind::DeviceWake, idx);
        }

        Ok(Self {
            cfg,
            seed,
            interval,
            cs,
            now: 0,
            queue,
            occupancy: ChannelOccupancy::new(),
            devices,
            records: Vec::new(),
            next_tx_id: 0,
        })
    }

    pub fn now(&self) -> Micros {
        self.now
    }

    pub fn occupancy(&self) -> &ChannelOccupancy {
        &self.occupancy
    }

    pub fn devices(&self) -> &[DeviceState] {
        &self.devices
    }

    pub fn records(&self) -> &[RunRecord] {
        &self.records
    }

    /// Processes the next event and returns it, or `None` once the run is over.
    pub fn step(&mut self) -> Option<SimEvent> {
        let ev = self.queue.pop()?;
        debug_assert!(ev.time >= self.now);
        self.now = ev.time;
        match ev.kind {
            EventKind::DeviceWake => self.on_wake(ev.device),
            EventKind::TxStart => self.on_tx_start(ev.device),
            EventKind::TxEnd => self.on_tx_end(ev.device),
            EventKind::AckDeliver => self.on_feedback(ev.device),
        }
        Some(ev)
    }

    pub fn run(mut self) -> SimOutput {
        while self.step().is_some() {}
        let arm_stats = self.devices.iter().map(|d| d.arm_stats().map(<[_]>::to_vec)).collect();
        SimOutput { records: self.records, arm_stats }
    }

    fn on_wake(&mut self, idx: usize) {
        let dev = &mut self.devices[idx];
        let decision = dev.policy.select(&mut dev.rng);
        dev.pending = Some(PendingAttempt {
            attempt: dev.attempts_done,
            decision,
            wake: self.now,
            tx_id: None,
            cause: None,
        });
        self.queue.push(self.now + self.cs, EventKind::TxStart, idx);
    }

    fn on_tx_start(&mut self, idx: usize) {
        let dev = &mut self.devices[idx];
        let pending = dev.pending.as_mut().expect("TxStart without a pending attempt");
        let combo = self.cfg.space.combos()[pending.decision.arm_index];
        let hz = combo.channel.center_frequency_hz;
        if carrier_sense(&self.occupancy, hz, pending.wake, self.cs) {
            pending.cause = Some(Cause::CarrierBusy);
            self.on_feedback(idx);
            return;
        }
        let airtime = to_micros(dev.energies[pending.decision.arm_index].t_toa);
        let id = self.next_tx_id;
        self.next_tx_id += 1;
        pending.tx_id = Some(id);
        self.occupancy.start(Transmission {
            id,
            device: idx,
            channel_hz: hz,
            start: self.now,
            end: self.now + airtime,
            power_dbm: combo.power.level_dbm,
            collided: false,
        });
        self.queue.push(self.now + airtime, EventKind::TxEnd, idx);
    }

    fn on_tx_end(&mut self, idx: usize) {
        let pending = self.devices[idx].pending.as_mut().expect("TxEnd without a pending attempt");
        let combo = self.cfg.space.combos()[pending.decision.arm_index];
        let tx = self
            .occupancy
            .finish(combo.channel.center_frequency_hz, pending.tx_id.expect("transmission id"))
            .expect("in-flight transmission");
        pending.cause = Some(resolve_reception(combo.channel.receivable, &tx));
        self.queue.push(self.now, EventKind::AckDeliver, idx);
    }

    /// Closes the pending attempt: computes the reward, updates the policy,
    /// logs the record and schedules the next wake-up.
    fn on_feedback(&mut self, idx: usize) {
        let dev = &mut self.devices[idx];
        let pending = dev.pending.take().expect("feedback without a pending attempt");
        let cause = pending.cause.expect("resolved cause");
        let arm = pending.decision.arm_index;
        let combo = self.cfg.space.combos()[arm];
        let acked = cause == Cause::Success;
        let transmitted = cause != Cause::CarrierBusy;

        let energy = dev.energies[arm];
        let (e_toa, e_active) = if transmitted {
            (energy.e_toa, energy.e_active)
        } else {
            (0.0, self.cfg.energy.overhead())
        };
        let reward = match (acked, dev.policy.reward_signal()) {
            (false, _) => 0.0,
            (true, RewardSignal::Energy) => reward_basis(&energy, dev.e_toa_min, self.cfg.reward_mode),
            (true, RewardSignal::Ack) => 1.0,
        };
        dev.policy
            .observe(&Feedback::new(arm, acked, reward, e_toa))
            .expect("rewards are non-negative and arms in range");

        let (tx_start, tx_end) = if transmitted {
            let start = pending.wake + self.cs;
            (Some(to_seconds(start)), Some(to_seconds(start + to_micros(energy.t_toa))))
        } else {
            (None, None)
        };
        self.records.push(RunRecord {
            run_seed: self.seed,
            device: idx,
            attempt: pending.attempt,
            arm_index: arm,
            channel_hz: combo.channel.center_frequency_hz,
            power_dbm: combo.power.level_dbm,
            cause,
            acked,
            reward,
            e_toa,
            e_active,
            wake_time: to_seconds(pending.wake),
            phase: pending.decision.phase,
            tie_candidates: pending.decision.tie_candidates,
            n_payload: dev.n_payload,
            tx_start,
            tx_end,
        });

        dev.attempts_done += 1;
        if dev.attempts_done < self.cfg.transmissions {
            let next = dev.start_offset + dev.attempts_done as u64 * self.interval;
            self.queue.push(next, EventKind::DeviceWake, idx);
        }
    }
}

/// Runs one complete simulation and returns the per-attempt log.
pub fn run_simulation(cfg: &SimConfig, seed: u64) -> Result<Vec<RunRecord>, ConfigError> {
    Ok(Simulator::new(cfg.clone(), seed)?.run().records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_examples() {
        let w = schedule_attempts(3_200_000, 10_000_000, 3);
        assert_eq!(w, vec![3_200_000, 13_200_000, 23_200_000]);
        let w = schedule_attempts(1_234, 10_000_000, 200);
        assert_eq!(*w.last().unwrap(), 1_234 + 1_990_000_000);
        let w = schedule_attempts(0, 10_000_000, 4);
        assert!(w.iter().all(|t| t % 10_000_000 == 0));
    }

    #[test]
    fn payload_rule() {
        let p = PayloadRule::default();
        assert_eq!(p.for_device(0), 36);
        assert_eq!(p.for_device(8), 44);
        assert_eq!(p.for_device(9), 36);
        assert_eq!(p.max(), 44);
    }
}
