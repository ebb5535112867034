//! Age of information and throughput of DSRC and WiFi networks sharing a
//! slotted CSMA medium, and the coexistence game between them.
//!
//! The pipeline runs bottom up: [`model`] holds configurations and slot
//! probabilities, [`metrics`] turns them into throughput and age, [`game`]
//! tabulates payoffs over a strategy grid, [`equilibrium`] searches that grid,
//! [`analysis`] checks the payoff derivatives and [`simulate`] provides a
//! Monte Carlo cross-check. [`cli`] wraps everything for the command line.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod metrics;
pub mod model;
pub mod simulate;

pub use error::{Error, Result};
pub use model::{AccessVector, NetworkConfig, Player, SlotLengths, StrategyPair};
