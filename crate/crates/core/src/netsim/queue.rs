use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

/// Simulation time in integer microseconds.
pub type Micros = u64;

pub fn to_micros(seconds: f64) -> Micros {
    (seconds * 1e6).round() as Micros
}

pub fn to_seconds(t: Micros) -> f64 {
    t as f64 / 1e6
}

/// Event kinds, declared in the order they are processed at equal timestamps.
/// Ends run before starts so that back-to-back transmissions do not overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    TxEnd,
    AckDeliver,
    TxStart,
    DeviceWake,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimEvent {
    pub time: Micros,
    pub kind: EventKind,
    pub device: usize,
    pub seq: u64,
}

impl SimEvent {
    fn key(&self) -> (Micros, EventKind, u64) {
        (self.time, self.kind, self.seq)
    }
}

impl Ord for SimEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-queue over (time, kind, insertion sequence).
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<SimEvent>>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time: Micros, kind: EventKind, device: usize) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(SimEvent { time, kind, device, seq }));
    }

    pub fn pop(&mut self) -> Option<SimEvent> {
        self.heap.pop().map(|Reverse(e)| e)
    }

    pub fn peek_time(&self) -> Option<Micros> {
        self.heap.peek().map(|Reverse(e)| e.time)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
