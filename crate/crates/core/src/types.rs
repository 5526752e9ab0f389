//! Shared value types.
//!
//! Every rate in this crate is expressed per attempt duration `tau_e`, so the
//! formulas stay dimensionless. Conversion to Hz happens only at the CLI
//! boundary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{finite, in_range, positive, Error, Result};

/// Returns `p` unchanged when it is a valid probability.
pub fn validate_probability(field: &'static str, p: f64) -> Result<f64> {
    in_range(field, p, 0.0, 1.0)
}

macro_rules! unit_interval_newtype {
    ($(#[$meta:meta])* $name:ident, $field:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
        #[serde(try_from = "f64", into = "f64")]
        pub struct $name(f64);

        impl $name {
            pub fn new(value: f64) -> Result<Self> {
                validate_probability($field, value).map(Self)
            }

            #[inline]
            pub fn get(self) -> f64 {
                self.0
            }
        }

        impl TryFrom<f64> for $name {
            type Error = Error;
            fn try_from(value: f64) -> Result<Self> {
                Self::new(value)
            }
        }

        impl From<$name> for f64 {
            fn from(v: $name) -> f64 {
                v.0
            }
        }
    };
}

unit_interval_newtype!(
    /// Optical channel efficiency, including coupling and fiber loss.
    Efficiency,
    "efficiency"
);

unit_interval_newtype!(
    /// Probability that an emitter is in its bright (photon-emitting) state.
    BrightState,
    "bright-state probability"
);

/// Mean photon number of a weak coherent pulse.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct MeanPhotonNumber(f64);

impl MeanPhotonNumber {
    pub fn new(value: f64) -> Result<Self> {
        finite("mean photon number", value)?;
        if value < 0.0 {
            return Err(Error::OutOfRange {
                field: "mean photon number",
                value,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        Ok(Self(value))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for MeanPhotonNumber {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<MeanPhotonNumber> for f64 {
    fn from(v: MeanPhotonNumber) -> f64 {
        v.0
    }
}

/// One client-server or server-server link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLinkParams", into = "RawLinkParams")]
pub struct LinkParams {
    eta: Efficiency,
    tau_e: f64,
    tau_ce: f64,
    tau_co: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLinkParams {
    eta: Efficiency,
    tau_e: f64,
    tau_ce: f64,
    tau_co: f64,
}

impl LinkParams {
    /// `tau_e` is the attempt duration, `tau_ce`/`tau_co` the coherence times
    /// while the node is active/idle. All in seconds.
    pub fn new(eta: Efficiency, tau_e: f64, tau_ce: f64, tau_co: f64) -> Result<Self> {
        positive("tau_e", tau_e)?;
        positive("tau_ce", tau_ce)?;
        positive("tau_co", tau_co)?;
        if tau_co < tau_ce {
            return Err(Error::InvalidParameter {
                field: "tau_co",
                reason: format!("idle coherence {tau_co} s is shorter than active {tau_ce} s"),
            });
        }
        Ok(Self {
            eta,
            tau_e,
            tau_ce,
            tau_co,
        })
    }

    pub fn eta(&self) -> Efficiency {
        self.eta
    }
    pub fn tau_e(&self) -> f64 {
        self.tau_e
    }
    pub fn tau_ce(&self) -> f64 {
        self.tau_ce
    }
    pub fn tau_co(&self) -> f64 {
        self.tau_co
    }

    /// Active coherence time in units of attempts.
    pub fn active_coherence_attempts(&self) -> f64 {
        self.tau_ce / self.tau_e
    }

    /// Idle coherence time in units of attempts.
    pub fn idle_coherence_attempts(&self) -> f64 {
        self.tau_co / self.tau_e
    }
}

impl TryFrom<RawLinkParams> for LinkParams {
    type Error = Error;
    fn try_from(raw: RawLinkParams) -> Result<Self> {
        Self::new(raw.eta, raw.tau_e, raw.tau_ce, raw.tau_co)
    }
}

impl From<LinkParams> for RawLinkParams {
    fn from(l: LinkParams) -> Self {
        Self {
            eta: l.eta,
            tau_e: l.tau_e,
            tau_ce: l.tau_ce,
            tau_co: l.tau_co,
        }
    }
}

/// A (rate, fidelity) pair plus the parameter values that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub rate: f64,
    pub fidelity: f64,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl RatePoint {
    pub fn new(rate: f64, fidelity: f64) -> Result<Self> {
        finite("rate", rate)?;
        if rate < 0.0 {
            return Err(Error::InvalidParameter {
                field: "rate",
                reason: format!("negative rate {rate}"),
            });
        }
        validate_probability("fidelity", fidelity)?;
        Ok(Self {
            rate,
            fidelity,
            params: BTreeMap::new(),
        })
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_owned(), value);
        self
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }
}

/// Multiplexed rate against its un-multiplexed baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainReport {
    pub rate_multiplexed: f64,
    pub rate_baseline: f64,
    pub gain: f64,
    /// Semiclassical bound the gain is compared against.
    pub classical_bound: f64,
    /// Set when `gain` is itself an upper bound on the achievable gain.
    #[serde(default)]
    pub is_upper_bound: bool,
}

impl GainReport {
    pub fn new(rate_multiplexed: f64, rate_baseline: f64, classical_bound: f64) -> Result<Self> {
        finite("rate_multiplexed", rate_multiplexed)?;
        finite("rate_baseline", rate_baseline)?;
        finite("classical_bound", classical_bound)?;
        if rate_baseline <= 0.0 {
            return Err(Error::Degenerate(format!(
                "baseline rate {rate_baseline} must be positive"
            )));
        }
        Ok(Self {
            rate_multiplexed,
            rate_baseline,
            gain: rate_multiplexed / rate_baseline,
            classical_bound,
            is_upper_bound: false,
        })
    }

    pub fn upper_bound(mut self) -> Self {
        self.is_upper_bound = true;
        self
    }

    /// True when the gain beats the semiclassical bound.
    pub fn exceeds_bound(&self) -> bool {
        self.gain > self.classical_bound
    }
}
