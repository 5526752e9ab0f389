//! Storage fidelity under two-rate dephasing.
//!
//! A stored qubit decays with coherence time `tau_ce` while its node runs
//! EG/RSP attempts and `tau_co` while idle. With coherence `c` left after
//! preparation, its fidelity factor is `(1 + c exp(-a/k_e - i/k_o)) / 2`,
//! where `a`, `i` are active and idle attempts and `k = tau / tau_e`.

use serde::{Deserialize, Serialize};

use super::HubConfig;
use crate::error::{in_range, Error, Result};
use crate::numeric::{one_minus_pow_complement, pow_complement};

/// Attempts a qubit spent in storage, split by node activity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Exposure {
    pub active: f64,
    pub idle: f64,
}

impl Exposure {
    pub fn new(active: f64, idle: f64) -> Self {
        Self { active, idle }
    }

    pub fn total(&self) -> f64 {
        self.active + self.idle
    }

    fn decay(&self, kappa_e: f64, kappa_o: f64) -> f64 {
        (-self.active / kappa_e - self.idle / kappa_o).exp()
    }
}

/// One stored qubit: its exposure and the coherence `2F - 1` it started with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoredQubit {
    pub exposure: Exposure,
    pub coherence: f64,
}

/// Coherence `2F - 1` of a state with fidelity `f`.
pub fn coherence_of(f: f64) -> f64 {
    2.0 * f - 1.0
}

/// `2^-s prod_i (1 + exp(-a_i/k_e - i_i/k_o))` for perfectly prepared qubits.
pub fn storage_fidelity(exposures: &[Exposure], hub: &HubConfig) -> Result<f64> {
    if exposures.len() != hub.s as usize {
        return Err(Error::InvalidParameter {
            field: "exposures",
            reason: format!("{} exposures for s = {}", exposures.len(), hub.s),
        });
    }
    let (ke, ko) = (hub.kappa_e(), hub.kappa_o());
    Ok(exposures
        .iter()
        .map(|x| 0.5 * (1.0 + x.decay(ke, ko)))
        .product())
}

/// Fidelity of `s` stored qubits with intrinsic preparation infidelity.
pub fn composed_fidelity(qubits: &[StoredQubit], kappa_e: f64, kappa_o: f64) -> f64 {
    qubits
        .iter()
        .map(|q| 0.5 * (1.0 + q.coherence * q.exposure.decay(kappa_e, kappa_o)))
        .product()
}

/// `E[exp(-n / kappa)]` for `n` geometric with success `p`, conditioned on
/// success within `n_cut` attempts.
pub fn expected_decay(p: f64, n_cut: u64, kappa: f64) -> Result<f64> {
    in_range("p", p, 0.0, 1.0)?;
    if p == 0.0 || n_cut == 0 {
        return Err(Error::Degenerate(
            "conditional attempt distribution is empty".into(),
        ));
    }
    let d = (-1.0 / kappa).exp();
    let ratio = (1.0 - p) * d;
    let n = n_cut as f64;
    // sum_{n=1}^{N} (1-p)^{n-1} p d^n / (1 - (1-p)^N)
    let series = if ratio == 1.0 {
        n
    } else {
        (1.0 - ratio.powf(n)) / (1.0 - ratio)
    };
    Ok(p * d * series / one_minus_pow_complement(p, n))
}

/// One geometric storage stage for the expectation form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayStage {
    pub p: f64,
    pub n_cut: u64,
    /// Coherence time in attempts for this stage.
    pub kappa: f64,
}

/// Expectation form: `2^-s prod_i (1 + prod_j E[exp(-t_ij / kappa_j)])`,
/// each stage a truncated geometric.
pub fn storage_fidelity_expected(per_qubit: &[Vec<DecayStage>]) -> Result<f64> {
    let mut f = 1.0;
    for stages in per_qubit {
        let mut decay = 1.0;
        for st in stages {
            decay *= expected_decay(st.p, st.n_cut, st.kappa)?;
        }
        f *= 0.5 * (1.0 + decay);
    }
    Ok(f)
}

/// Probability that a geometric(p) stage finishes within `n` attempts.
pub fn within_cutoff(p: f64, n: u64) -> f64 {
    1.0 - pow_complement(p, n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hub(s: u32) -> HubConfig {
        HubConfig {
            s,
            ..HubConfig::example()
        }
    }

    #[test]
    fn zero_exposure_is_perfect() {
        let h = hub(3);
        let f = storage_fidelity(&[Exposure::default(); 3], &h).unwrap();
        assert_eq!(f, 1.0);
        assert!(storage_fidelity(&[Exposure::default(); 2], &h).is_err());
    }

    #[test]
    fn single_qubit_active_decay() {
        let h = hub(1);
        let n = 5000.0;
        let f = storage_fidelity(&[Exposure::new(n, 0.0)], &h).unwrap();
        let expect = 0.5 * (1.0 + (-n * h.tau_e / h.tau_ce).exp());
        assert!((f - expect).abs() < 1e-15);
    }

    #[test]
    fn expectation_form_degenerates_to_deterministic() {
        let h = hub(2);
        let stages = vec![
            vec![DecayStage { p: 0.3, n_cut: 1, kappa: h.kappa_e() }],
            vec![DecayStage { p: 0.01, n_cut: 1, kappa: h.kappa_o() }],
        ];
        let expected = storage_fidelity_expected(&stages).unwrap();
        let det = storage_fidelity(&[Exposure::new(1.0, 0.0), Exposure::new(0.0, 1.0)], &h).unwrap();
        assert!((expected - det).abs() < 1e-15);
    }

    #[test]
    fn expected_decay_matches_direct_sum() {
        for &(p, n_cut, kappa) in &[(0.2, 10u64, 5.0), (1e-3, 1000, 66_666.7), (1.0, 7, 3.0)] {
            let q: f64 = 1.0 - p;
            let norm: f64 = (1..=n_cut).map(|n| q.powi(n as i32 - 1) * p).sum();
            let direct: f64 = (1..=n_cut)
                .map(|n| q.powi(n as i32 - 1) * p / norm * (-(n as f64) / kappa).exp())
                .sum();
            let closed = expected_decay(p, n_cut, kappa).unwrap();
            assert!((closed - direct).abs() < 1e-12, "{closed} vs {direct}");
        }
        assert!(expected_decay(0.0, 10, 1.0).is_err());
    }

    #[test]
    fn intrinsic_coherence_composes() {
        let q = StoredQubit {
            exposure: Exposure::default(),
            coherence: coherence_of(0.9),
        };
        assert!((composed_fidelity(&[q], 1.0, 1.0) - 0.9).abs() < 1e-15);
    }
}
