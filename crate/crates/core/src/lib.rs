//! Discrete-event simulation of a LoRa uplink network in which every end
//! device picks its own (channel, transmit power) pair per transmission.
//!
//! The crate is organised bottom-up:
//!
//! - [`params`]: channels, power levels and the arm space.
//! - [`energy`]: airtime and active-mode energy per attempt, reward shaping.
//! - [`policy`]: UCB1-tuned, epsilon-greedy, fixed allocation and ADR-Lite.
//! - [`netsim`]: event queue, carrier sense, collisions and ACK feedback.
//! - [`metrics`]: success rate, energy efficiency and power-level shares.
//! - [`config`], [`sweep`], [`tables`]: experiment configuration, multi-run
//!   sweeps and CSV output used by the `lora-txsel` binary.

pub mod config;
pub mod energy;
pub mod error;
pub mod metrics;
pub mod netsim;
pub mod params;
pub mod policy;
pub mod seed;
pub mod sweep;
pub mod tables;

pub use error::{ConfigError, Error, MetricsError, PolicyError};
