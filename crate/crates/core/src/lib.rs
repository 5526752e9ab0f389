//! Rate and fidelity models for multiplexed entanglement distribution.

pub mod cli;
pub mod eg;
pub mod error;
pub mod multiserver;
pub mod numeric;
pub mod protocols;
pub mod rsp;
pub mod scanstats;
pub mod types;

pub use error::{Error, Result};
pub use types::{BrightState, Efficiency, GainReport, LinkParams, MeanPhotonNumber, RatePoint};
