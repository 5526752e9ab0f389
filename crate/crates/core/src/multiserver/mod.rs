//! Multi-server multiplexing: one client prepares `s` qubits on a hub of `M`
//! interconnected servers, then consolidates them by inter-server EG.
//!
//! Under the multiplex strategy every server attempts RSP from round start;
//! the first success hosts the result and later successes are teleported to
//! it. All times are in attempts of duration `tau_e`.

mod fidelity;
mod optimize;
mod sampler;

pub use fidelity::{
    coherence_of, composed_fidelity, expected_decay, storage_fidelity, storage_fidelity_expected,
    within_cutoff, DecayStage, Exposure, StoredQubit,
};
pub use optimize::{
    baseline_rate, grid_worst_case, optimize_hub, HubGrids, HubOptimum, HubParams, HubPhysical, OptimizeRequest,
    ServerLink,
};
pub use sampler::{
    run_sampler, run_sampler_in, sample_round, select_first, RoundSample, SamplerConfig,
    SamplerResult,
};

use serde::{Deserialize, Serialize};

use crate::error::{in_range, positive, Error, Result};
use crate::numeric::{one_minus_pow_complement, pow_complement};
use crate::protocols::teleport_fidelity;
use crate::types::GainReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Commit to the first server that succeeds; prepare the rest there.
    TryAndCommit,
    /// Never retry on a server holding a qubit; teleport to the first one.
    Multiplex,
}

/// Symmetric hub: one client-server and one server-server success
/// probability, shared cutoffs and coherence times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HubConfig {
    /// Number of servers.
    pub m: u32,
    /// Number of qubits to prepare.
    pub s: u32,
    pub p_sc: f64,
    pub p_ss: f64,
    /// Cutoff while the node runs attempts.
    pub n_e: u64,
    /// Cutoff on the spread of RSP completions.
    pub n_o: u64,
    pub tau_e: f64,
    pub tau_ce: f64,
    pub tau_co: f64,
    /// Intrinsic fidelity of one client-server RSP.
    pub f0_sc: f64,
    /// Intrinsic fidelity of one server-server Bell pair.
    pub f0_ss: f64,
}

impl HubConfig {
    /// Reference hub timings with `M = s = 2` and ideal protocols.
    pub fn example() -> Self {
        Self {
            m: 2,
            s: 2,
            p_sc: 1e-3,
            p_ss: 0.3,
            n_e: 1000,
            n_o: 100,
            tau_e: 300e-9,
            tau_ce: 20e-3,
            tau_co: 2.8,
            f0_sc: 1.0,
            f0_ss: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidParameter {
                field: "M",
                reason: "at least one server".into(),
            });
        }
        if self.s == 0 {
            return Err(Error::InvalidParameter {
                field: "s",
                reason: "at least one qubit".into(),
            });
        }
        if self.m > 1 && self.s > self.m {
            return Err(Error::InvalidParameter {
                field: "s",
                reason: format!(
                    "the multiplex sampler needs s <= M, got s = {} and M = {}",
                    self.s, self.m
                ),
            });
        }
        for (field, p) in [("p_sc", self.p_sc), ("p_ss", self.p_ss)] {
            in_range(field, p, 0.0, 1.0)?;
            if p == 0.0 {
                return Err(Error::InvalidParameter {
                    field,
                    reason: "success probability must be positive".into(),
                });
            }
        }
        if self.n_e == 0 || self.n_o == 0 {
            return Err(Error::InvalidParameter {
                field: if self.n_e == 0 { "n_e" } else { "n_o" },
                reason: "cutoffs must be at least 1".into(),
            });
        }
        positive("tau_e", self.tau_e)?;
        positive("tau_ce", self.tau_ce)?;
        positive("tau_co", self.tau_co)?;
        if self.tau_co < self.tau_ce {
            return Err(Error::InvalidParameter {
                field: "tau_co",
                reason: "idle coherence shorter than active coherence".into(),
            });
        }
        in_range("f0_sc", self.f0_sc, 0.0, 1.0)?;
        in_range("f0_ss", self.f0_ss, 0.0, 1.0)?;
        Ok(())
    }

    /// Active coherence time in attempts.
    pub fn kappa_e(&self) -> f64 {
        self.tau_ce / self.tau_e
    }

    /// Idle coherence time in attempts.
    pub fn kappa_o(&self) -> f64 {
        self.tau_co / self.tau_e
    }

    /// Coherence of a freshly prepared qubit on its first server.
    pub fn coherence_local(&self) -> f64 {
        coherence_of(self.f0_sc)
    }

    /// Coherence of a qubit teleported to the host server.
    pub fn coherence_teleported(&self) -> Result<f64> {
        Ok(coherence_of(self.f0_sc) * coherence_of(teleport_fidelity(self.f0_ss)?))
    }

    /// Cutoff of the single-server reference (`M = 1`). That server keeps
    /// attempting RSP while it holds qubits, so this is an active-storage
    /// cutoff; it is carried in `n_o` so the optimizer can pick it under the
    /// same fidelity floor.
    pub fn baseline_window(&self) -> u64 {
        self.n_o
    }
}

/// Worst-case fidelity `F*` of an accepted round.
///
/// Every accepted round's actual fidelity is at least this value. For the
/// multiplex strategy, the host qubit lives at most `n_o + n_e` attempts
/// (`n_e` for teleported qubits when `s = 2`), of which at most
/// `(s-1) n_e` overlap EG activity; active time is taken as large as
/// allowed since it decays faster. The single-server reference keeps `s-1`
/// qubits active for its whole window.
pub fn worst_case_fidelity(hub: &HubConfig) -> Result<f64> {
    worst_case_qubits(hub).map(|qs| composed_fidelity(&qs, hub.kappa_e(), hub.kappa_o()))
}

pub(crate) fn worst_case_qubits(hub: &HubConfig) -> Result<Vec<StoredQubit>> {
    let s = hub.s as usize;
    let c_local = hub.coherence_local();
    let mut qubits = Vec::with_capacity(s);
    if hub.m == 1 {
        let w = hub.baseline_window() as f64;
        for i in 0..s {
            let active = if i + 1 < s { w } else { 0.0 };
            qubits.push(StoredQubit {
                exposure: Exposure::new(active, 0.0),
                coherence: c_local,
            });
        }
        return Ok(qubits);
    }
    let (n_e, n_o) = (hub.n_e as f64, hub.n_o as f64);
    let active_cap = (s.saturating_sub(1)) as f64 * n_e;
    let split = |total: f64| {
        let active = total.min(active_cap);
        Exposure::new(active, total - active)
    };
    if s == 1 {
        return Ok(vec![StoredQubit {
            exposure: Exposure::default(),
            coherence: c_local,
        }]);
    }
    let c_tel = hub.coherence_teleported()?;
    qubits.push(StoredQubit {
        exposure: split(n_o + n_e),
        coherence: c_local,
    });
    let moved_total = if s == 2 { n_e } else { n_o + n_e };
    for _ in 1..s {
        qubits.push(StoredQubit {
            exposure: split(moved_total),
            coherence: c_tel,
        });
    }
    Ok(qubits)
}

/// Single-qubit gain of RSP to any of `M` servers: `M (1-p)^(M-1)`.
pub fn single_qubit_hub_gain(p: f64, m: u32) -> Result<GainReport> {
    in_range("p", p, 0.0, 1.0)?;
    if p == 0.0 || m == 0 {
        return Err(Error::InvalidParameter {
            field: if p == 0.0 { "p" } else { "M" },
            reason: "must be positive".into(),
        });
    }
    let mf = m as f64;
    GainReport::new(mf * p * pow_complement(p, mf - 1.0), p, mf)
}

/// Closed-form `s = 2` rate with an underflow marker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticRate {
    /// Successes per attempt duration.
    pub rate: f64,
    /// A `(1-P)^n` term fell below the smallest normal double.
    pub underflow: bool,
}

fn log_pow(p: f64, n: f64, underflow: &mut bool) -> f64 {
    let log = n * (-p).ln_1p();
    if log < f64::MIN_POSITIVE.ln() {
        *underflow = true;
    }
    pow_complement(p, n)
}

/// Truncated mean `(1-P)/P (1 - q^n - n P q^n) + q^n n` of a geometric
/// stage cut at `n` attempts.
fn stage_time(p: f64, n: f64, q_n: f64) -> f64 {
    (1.0 - p) / p * (one_minus_pow_complement(p, n) - n * p * q_n) + q_n * n
}

/// Analytic `s = 2` rate for the given strategy, per attempt duration.
pub fn analytic_rate_s2(hub: &HubConfig, strategy: Strategy) -> Result<AnalyticRate> {
    if hub.s != 2 {
        return Err(Error::InvalidParameter {
            field: "s",
            reason: format!("analytic rates cover s = 2 only, got {}", hub.s),
        });
    }
    if hub.m == 0 {
        return Err(Error::InvalidParameter {
            field: "M",
            reason: "at least one server".into(),
        });
    }
    let mut underflow = false;
    let (p, mf) = (hub.p_sc, hub.m as f64);
    for (field, v) in [("p_sc", hub.p_sc), ("p_ss", hub.p_ss)] {
        in_range(field, v, 0.0, 1.0)?;
        if v == 0.0 {
            return Err(Error::InvalidParameter {
                field,
                reason: "success probability must be positive".into(),
            });
        }
    }
    let first = 1.0 / (mf * p);
    let strategy = if hub.m == 1 {
        Strategy::TryAndCommit
    } else {
        strategy
    };
    let rate = match strategy {
        Strategy::TryAndCommit => {
            let n = hub.n_e as f64;
            let q_n = log_pow(p, n, &mut underflow);
            let num = one_minus_pow_complement(p, n);
            num / (first + stage_time(p, n, q_n))
        }
        Strategy::Multiplex => {
            let k = (mf - 1.0) * hub.n_o as f64;
            let q_k = log_pow(p, k, &mut underflow);
            let spread_ok = one_minus_pow_complement(p, k);
            let ps = hub.p_ss;
            let n = hub.n_e as f64;
            let s_n = log_pow(ps, n, &mut underflow);
            let eg_ok = one_minus_pow_complement(ps, n);
            let second = (1.0 - p) / p * (spread_ok - k * p * q_k) / (mf - 1.0)
                + q_k * hub.n_o as f64;
            let eg = spread_ok * stage_time(ps, n, s_n);
            spread_ok * eg_ok / (first + second + eg)
        }
    };
    Ok(AnalyticRate { rate, underflow })
}

/// Analytic `s = 2` gain against the single-server try-and-commit rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticGain {
    /// Classical bound in the report is `M^2`.
    pub report: GainReport,
    /// `M` for try-and-commit, `M (M-1) n_o n_e / n_e'` for multiplex.
    pub asymptotic_bound: f64,
    pub underflow: bool,
}

/// Gain with the reference using the same `n_e`.
pub fn analytic_gain_s2(hub: &HubConfig, strategy: Strategy) -> Result<AnalyticGain> {
    analytic_gain_s2_with_reference(hub, strategy, hub.n_e)
}

/// Gain with the reference cutoff `n_e_ref` (the single-server value set by
/// the same fidelity floor).
pub fn analytic_gain_s2_with_reference(
    hub: &HubConfig,
    strategy: Strategy,
    n_e_ref: u64,
) -> Result<AnalyticGain> {
    let mux = analytic_rate_s2(hub, strategy)?;
    let base_hub = HubConfig {
        m: 1,
        n_e: n_e_ref,
        ..*hub
    };
    let base = analytic_rate_s2(&base_hub, Strategy::TryAndCommit)?;
    let mf = hub.m as f64;
    let asymptotic_bound = match strategy {
        Strategy::TryAndCommit => mf,
        Strategy::Multiplex if hub.m == 1 => 1.0,
        Strategy::Multiplex => {
            mf * (mf - 1.0) * hub.n_o as f64 * hub.n_e as f64 / n_e_ref as f64
        }
    };
    Ok(AnalyticGain {
        report: GainReport::new(mux.rate, base.rate, mf * mf)?,
        asymptotic_bound,
        underflow: mux.underflow || base.underflow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hub(m: u32, p_sc: f64, p_ss: f64, n_e: u64, n_o: u64) -> HubConfig {
        HubConfig {
            m,
            p_sc,
            p_ss,
            n_e,
            n_o,
            ..HubConfig::example()
        }
    }

    #[test]
    fn single_qubit_gain() {
        assert!((single_qubit_hub_gain(1e-9, 6).unwrap().gain - 6.0).abs() < 1e-6);
        assert_eq!(single_qubit_hub_gain(0.3, 1).unwrap().gain, 1.0);
        assert!((single_qubit_hub_gain(0.5, 2).unwrap().gain - 1.0).abs() < 1e-15);
        assert!(single_qubit_hub_gain(0.0, 2).is_err());
    }

    #[test]
    fn two_sequential_stages_without_cutoff() {
        let p = 1e-6;
        let r = analytic_rate_s2(&hub(1, p, 0.5, u64::MAX / 4, 1), Strategy::TryAndCommit).unwrap();
        assert!((r.rate * 2.0 / p - 1.0).abs() < 1e-5);
        let m_as_t = analytic_rate_s2(&hub(1, 1e-3, 0.5, 1000, 10), Strategy::Multiplex).unwrap();
        let t = analytic_rate_s2(&hub(1, 1e-3, 0.5, 1000, 10), Strategy::TryAndCommit).unwrap();
        assert_eq!(m_as_t, t);
    }

    #[test]
    fn try_and_commit_gain_tends_to_m() {
        for m in [2, 5, 10] {
            let g = analytic_gain_s2(&hub(m, 1e-9, 0.5, 1000, 100), Strategy::TryAndCommit).unwrap();
            assert!((g.report.gain / m as f64 - 1.0).abs() < 1e-4, "{}", g.report.gain);
        }
        let g = analytic_gain_s2(&hub(1, 1e-3, 0.5, 1000, 100), Strategy::Multiplex).unwrap();
        assert!((g.report.gain - 1.0).abs() < 1e-15);
    }

    #[test]
    fn multiplex_gain_respects_asymptotic_bound() {
        for m in [2, 4, 8] {
            let h = hub(m, 1e-8, 0.9, 1000, 50);
            let g = analytic_gain_s2(&h, Strategy::Multiplex).unwrap();
            assert!(g.report.gain <= g.asymptotic_bound * 1.05);
            // in this limit the gain is M (M-1) n_o / n_e'
            let lead = (m * (m - 1)) as f64 * 50.0 / 1000.0;
            assert!((g.report.gain / lead - 1.0).abs() < 0.01, "{} vs {lead}", g.report.gain);
        }
        let big = analytic_gain_s2(&hub(200, 1e-9, 0.9, 1000, 50), Strategy::Multiplex).unwrap();
        assert!(big.report.gain <= 200.0 * 200.0 * 50.0);
    }

    #[test]
    fn underflow_is_flagged() {
        let r = analytic_rate_s2(&hub(2, 0.5, 0.5, 5000, 5000), Strategy::Multiplex).unwrap();
        assert!(r.underflow);
        assert!(r.rate.is_finite() && r.rate > 0.0);
        let r = analytic_rate_s2(&hub(2, 1e-3, 0.3, 1000, 100), Strategy::Multiplex).unwrap();
        assert!(!r.underflow);
        let mut h = hub(2, 1e-3, 0.3, 1000, 100);
        h.s = 3;
        assert!(analytic_rate_s2(&h, Strategy::Multiplex).is_err());
    }

    #[test]
    fn worst_case_examples() {
        let mut h = HubConfig::example();
        h.n_e = 0;
        h.n_o = 0;
        assert_eq!(worst_case_fidelity(&h).unwrap(), 1.0);
        let h = HubConfig::example();
        let f = worst_case_fidelity(&h).unwrap();
        let (ke, ko) = (h.kappa_e(), h.kappa_o());
        let expect = 0.25
            * (1.0 + (-(h.n_e as f64) / ke - h.n_o as f64 / ko).exp())
            * (1.0 + (-(h.n_e as f64) / ke).exp());
        assert!((f - expect).abs() < 1e-15);
        let base = HubConfig { m: 1, ..h };
        let w = base.baseline_window() as f64;
        assert!((worst_case_fidelity(&base).unwrap() - 0.5 * (1.0 + (-w / ke).exp())).abs() < 1e-15);
    }

    #[test]
    fn worst_case_is_monotone_in_cutoffs() {
        for m in [1, 3] {
            for s in 1..=3 {
                let mut prev = f64::INFINITY;
                for n in [1u64, 10, 100, 1_000, 10_000, 1_000_000] {
                    let h = HubConfig {
                        m,
                        s: s.min(m.max(1)).max(if m == 1 { s } else { 1 }),
                        n_o: n,
                        n_e: n,
                        f0_sc: 0.99,
                        f0_ss: 0.999,
                        ..HubConfig::example()
                    };
                    let f = worst_case_fidelity(&h).unwrap();
                    assert!(f <= prev);
                    prev = f;
                }
            }
        }
    }

    #[test]
    fn validation() {
        let mut h = HubConfig::example();
        assert!(h.validate().is_ok());
        h.s = 3;
        assert!(matches!(h.validate(), Err(Error::InvalidParameter { field: "s", .. })));
        let h = HubConfig { m: 1, s: 4, ..HubConfig::example() };
        assert!(h.validate().is_ok());
        let h = HubConfig { p_ss: 0.0, ..HubConfig::example() };
        assert!(h.validate().is_err());
        let h = HubConfig { tau_co: 1e-3, ..HubConfig::example() };
        assert!(h.validate().is_err());
    }
}
