use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::queue::Micros;

/// Why an attempt succeeded or failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cause {
    Success,
    ChannelNotReceivable,
    CarrierBusy,
    Collision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub id: u64,
    pub device: usize,
    pub channel_hz: u64,
    /// Half-open airtime `[start, end)`.
    pub start: Micros,
    pub end: Micros,
    pub power_dbm: i32,
    pub collided: bool,
}

pub fn intervals_overlap(a: &Transmission, b: &Transmission) -> bool {
    a.start < b.end && b.start < a.end
}

#[derive(Debug, Default, Clone)]
struct ChannelState {
    in_flight: Vec<Transmission>,
    last_end: Option<Micros>,
}

/// In-flight transmissions per channel, plus the latest end time of each
/// channel's completed transmissions.
#[derive(Debug, Default, Clone)]
pub struct ChannelOccupancy {
    channels: BTreeMap<u64, ChannelState>,
    started: u64,
    ended: u64,
}

impl ChannelOccupancy {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a transmission and marks it and every transmission already on the
    /// same channel as collided.
    pub fn start(&mut self, mut tx: Transmission) {
        let state = self.channels.entry(tx.channel_hz).or_default();
        for other in state.in_flight.iter_mut() {
            if intervals_overlap(other, &tx) {
                other.collided = true;
                tx.collided = true;
            }
        }
        state.in_flight.push(tx);
        self.started += 1;
    }

    /// Removes and returns the transmission with the given id.
    pub fn finish(&mut self, channel_hz: u64, id: u64) -> Option<Transmission> {
        let state = self.channels.get_mut(&channel_hz)?;
        let pos = state.in_flight.iter().position(|t| t.id == id)?;
        let tx = state.in_flight.swap_remove(pos);
        state.last_end = Some(state.last_end.map_or(tx.end, |e| e.max(tx.end)));
        self.ended += 1;
        Some(tx)
    }

    pub fn in_flight(&self, channel_hz: u64) -> &[Transmission] {
        self.channels.get(&channel_hz).map_or(&[], |s| &s.in_flight)
    }

    pub fn in_flight_total(&self) -> usize {
        self.channels.values().map(|s| s.in_flight.len()).sum()
    }

    pub fn started(&self) -> u64 {
        self.started
    }

    pub fn ended(&self) -> u64 {
        self.ended
    }
}

/// True when any known transmission on the channel overlaps the listening
/// window `[t, t + cs_duration)`. Both the window and airtime are half-open:
/// a transmission ending exactly at `t`, or starting exactly when the window
/// closes, is not heard. With `cs_duration == 0` this reduces to "something
/// that started before `t` is still on air".
pub fn carrier_sense(occupancy: &ChannelOccupancy, channel_hz: u64, t: Micros, cs_duration: Micros) -> bool {
    let Some(state) = occupancy.channels.get(&channel_hz) else {
        return false;
    };
    let window_end = t + cs_duration;
    state.last_end.is_some_and(|e| e > t)
        || state.in_flight.iter().any(|tx| tx.start < window_end && tx.end > t)
}

/// Outcome of a completed transmission at the gateway. No capture effect.
pub fn resolve_reception(receivable: bool, tx: &Transmission) -> Cause {
    if !receivable {
        Cause::ChannelNotReceivable
    } else if tx.collided {
        Cause::Collision
    } else {
        Cause::Success
    }
}
